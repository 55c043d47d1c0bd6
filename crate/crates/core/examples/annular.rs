//! Annular Khovanov homology: the Hopf link around one puncture, and the
//! k-grading of every generator.

use mkh::diagram::Diagram;
use mkh::homology::akh;
use mkh::khovanov::build_complex;

fn main() {
    let d = Diagram::parse(include_str!("../fixtures/hopf_annular.json")).unwrap();
    for g in build_complex(&d).unwrap().generators {
        let labels: String = g.labels.iter().map(|l| l.to_string()).collect();
        println!(
            "vertex {:02b} labels {labels:>2}  h={:>2} q={:>2} k={:>2}",
            g.vertex, g.degree.h, g.degree.q, g.degree.gsigma[0]
        );
    }
    print!("{}", akh(&d, 1).unwrap().to_text());
}
