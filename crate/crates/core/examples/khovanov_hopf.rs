//! Builds the cube of resolutions of the Hopf link, prints the two nonzero
//! differential blocks and the homology table.

use mkh::diagram::Diagram;
use mkh::homology::{kh, table, Theory};
use mkh::khovanov::build_complex;

fn main() {
    let d = Diagram::parse(include_str!("../fixtures/hopf.json")).unwrap();
    let kc = build_complex(&d).unwrap();
    println!("{} generators, signs {:?}", kc.generators.len(), kc.signs);
    for (from, to) in [(0b00, 0b01), (0b00, 0b10), (0b01, 0b11), (0b10, 0b11)] {
        println!("d: {from:02b} -> {to:02b}");
        for row in kc.block(from, to) {
            println!("  {row:?}");
        }
    }
    print!("{}", table(&kc, Theory::Kh).unwrap().to_text());
    assert_eq!(kh(&d).unwrap().total(), 4);
}
