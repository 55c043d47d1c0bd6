//! Applies first and second Reidemeister moves to the twice-punctured Hopf
//! link and checks that every table is unchanged.

use mkh::diagram::{Diagram, Sign, Strand};
use mkh::homology::{aps_tilde, kh, mkh, HomologyTable};

fn tables(d: &Diagram) -> [HomologyTable; 3] {
    [kh(d).unwrap(), mkh(d).unwrap(), aps_tilde(d).unwrap()]
}

fn main() {
    let d = Diagram::parse(include_str!("../fixtures/hopf2.json")).unwrap();
    let base = tables(&d);
    let kinked = d.apply_r1(Strand::Arc(2), Sign::Neg).unwrap();
    let poked = kinked.apply_r2(Strand::Arc(1), Strand::Arc(3)).unwrap();
    for (what, e) in [("r1 on arc 2", &kinked), ("then r2 of arcs 1 and 3", &poked)] {
        println!("{what}: {} crossings, writhe {}", e.n_crossings(), e.crossing_signs().writhe);
        println!("{}", e.to_json());
        println!("tables unchanged: {}\n", tables(e) == base);
    }
}
