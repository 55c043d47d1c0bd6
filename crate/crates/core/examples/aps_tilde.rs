//! The Φ-graded theory and the original APS gradings of each generator.

use mkh::diagram::Diagram;
use mkh::homology::aps_tilde;
use mkh::khovanov::{aps_original_gradings, build_complex};

fn main() {
    let d = Diagram::parse(include_str!("../fixtures/hopf2.json")).unwrap();
    let kc = build_complex(&d).unwrap();
    println!("{:>6} {:>6} {:>3} {:>3} {:>4}  psi", "vertex", "labels", "I", "J", "tau");
    for g in &kc.generators {
        let a = aps_original_gradings(g, &d);
        let labels: String = g.labels.iter().map(|l| l.to_string()).collect();
        let psi: Vec<String> = a.psi.iter().map(|(s, c)| format!("{s}:{c}")).collect();
        println!(
            "{:>6} {labels:>6} {:>3} {:>3} {:>4}  {}",
            format!("{:02b}", g.vertex),
            a.i,
            a.j,
            a.tau,
            psi.join(" ")
        );
    }
    println!();
    print!("{}", aps_tilde(&d).unwrap().to_text());
}
