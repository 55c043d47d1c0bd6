//! MKh of links in a twice-punctured disk, with the AKh obtained by keeping
//! one puncture at a time.

use mkh::diagram::Diagram;
use mkh::homology::{akh, kh, mkh};

fn main() {
    for (name, text) in [
        ("hopf2", include_str!("../fixtures/hopf2.json")),
        ("picture_hanging", include_str!("../fixtures/picture_hanging.json")),
    ] {
        let d = Diagram::parse(text).unwrap();
        println!("== {name}");
        print!("{}", mkh(&d).unwrap().to_text());
        for k in 1..=d.n_punctures() {
            println!("AKh keeping puncture {k}: total rank {}", akh(&d, k).unwrap().total());
        }
        println!("Kh: total rank {}\n", kh(&d).unwrap().total());
    }
}
