//! All four spectral sequences on the picture-hanging link.
//!
//! Usage: cargo run --example spectral_sequences [scenario]

use mkh::diagram::Diagram;
use mkh::spectral::{scenario, Scenario};

fn main() {
    let d = Diagram::parse(include_str!("../fixtures/picture_hanging.json")).unwrap();
    let all = [
        ("aps-to-mkh", Scenario::ApsToMkh),
        ("mkh-to-akh", Scenario::MkhToAkh(1)),
        ("mkh-to-kh", Scenario::MkhToKh),
        ("mkh-to-mkh", Scenario::MkhToMkh(vec![2])),
    ];
    let only = std::env::args().nth(1);
    for (name, which) in all {
        if only.as_deref().is_some_and(|o| o != name) {
            continue;
        }
        println!("==== {name}");
        print!("{}", scenario(&d, &which).unwrap().to_text());
        println!();
    }
}
