//! Graded Euler characteristics, and the map sending the Φ-graded one to the
//! gsigma-graded one.

use mkh::diagram::Diagram;
use mkh::homology::{aps_tilde, chain_euler, chi_h, euler, kh, mkh, Theory};
use mkh::khovanov::build_complex;

fn main() {
    let d = Diagram::parse(include_str!("../fixtures/picture_hanging.json")).unwrap();
    let kc = build_complex(&d).unwrap();
    let aps = euler(&aps_tilde(&d).unwrap());
    let m = euler(&mkh(&d).unwrap());
    println!("Kh   {}", euler(&kh(&d).unwrap()));
    println!("MKh  {m}");
    println!("APS~ {aps}");
    println!("chi_h(APS~) = MKh: {}", chi_h(&aps) == m);
    println!("chain level agrees: {}", chain_euler(&kc, Theory::MKh) == m);
    println!("MKh at y = 1: {}", m.at_variables_one());
}
