//! Searches small knot diagrams in a twice-punctured disk for one whose MKh
//! matches a target table, by brute force over Gauss codes, crossing signs,
//! the outer face and the faces holding the punctures.
//!
//! Usage: cargo run --release --example fixture_search [max_crossings] [--no-kinks]

use std::collections::BTreeMap;

use mkh::diagram::{ArcId, Diagram};
use mkh::homology::{mkh, DegreeKey};

fn matchings(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if points.is_empty() {
        return vec![vec![]];
    }
    let first = points[0];
    let mut out = Vec::new();
    for k in 1..points.len() {
        let rest: Vec<usize> = points[1..].iter().enumerate().filter(|&(i, _)| i + 1 != k).map(|(_, &p)| p).collect();
        for mut m in matchings(&rest) {
            m.push((first, points[k]));
            out.push(m);
        }
    }
    out
}

/// PD code of a knot whose arcs are numbered 1..2n along the strand; visit `i`
/// sits between arcs `i` and `i + 1`.
fn pd(n: usize, pairs: &[(usize, usize)], under_first: u32, positive: u32) -> Vec<[ArcId; 4]> {
    let m = 2 * n as ArcId;
    let next = |a: ArcId| if a == m { 1 } else { a + 1 };
    pairs
        .iter()
        .enumerate()
        .map(|(c, &(a, b))| {
            let (u, o) = if under_first >> c & 1 == 1 { (a, b) } else { (b, a) };
            let (i, j) = (u as ArcId + 1, o as ArcId + 1);
            if positive >> c & 1 == 1 {
                [i, next(j), next(i), j]
            } else {
                [i, j, next(i), next(j)]
            }
        })
        .collect()
}

fn target() -> BTreeMap<(i64, i64, DegreeKey), usize> {
    let m = |a: i64, b: i64| DegreeKey::Multi(vec![a, b]);
    BTreeMap::from([
        ((0, -1, m(-2, 0)), 1),
        ((0, 1, m(0, 0)), 2),
        ((0, -1, m(0, -2)), 1),
        ((1, 1, m(0, -2)), 1),
        ((1, 1, m(-2, 0)), 1),
        ((1, -1, m(-2, -2)), 1),
        ((2, 1, m(-2, -2)), 1),
    ])
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let max: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let no_kinks = args.iter().any(|a| a == "--no-kinks");
    let want = target();
    let mut found = 0;
    for n in 1..=max {
        let points: Vec<usize> = (0..2 * n).collect();
        for pairs in matchings(&points) {
            for under in 0..1u32 << n {
                for pos in 0..1u32 << n {
                    let crossings = pd(n, &pairs, under, pos);
                    if no_kinks && crossings.iter().any(|c| (0..4).any(|i| c[i] == c[(i + 1) % 4])) {
                        continue;
                    }
                    let Ok(bare) = Diagram::new(0, crossings.clone(), BTreeMap::new(), vec![]) else { continue };
                    let nf = bare.faces().len();
                    for outer in 0..nf {
                        for f1 in 0..nf {
                            for f2 in 0..nf {
                                let Ok(d) =
                                    Diagram::with_punctures_in_faces(crossings.clone(), outer, &[f1, f2], vec![])
                                else {
                                    continue;
                                };
                                if mkh(&d).map(|t| t.ranks == want).unwrap_or(false) {
                                    found += 1;
                                    println!("match: crossings={crossings:?} outer={outer} punctures=[{f1},{f2}]");
                                    println!("{}", d.to_json());
                                    if found >= 4 {
                                        return;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        println!("searched n = {n}: {found} matches so far");
    }
}
