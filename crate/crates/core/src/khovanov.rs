//! The Khovanov cube of resolutions as a based complex over the rationals.
//!
//! Generators are enumerated by cube vertex (crossing `c_1` is the lowest bit
//! of the vertex integer), then by labels read as a binary number with the
//! first circle as the most significant digit and `+` as 0, so all-`+` comes
//! first. Circles are ordered by their smallest arc identifier, free loops last.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diagram::{CrossingSigns, Diagram, DiagramError, PunctureSet, Resolution};
use crate::exactalg::{rat, AlgError, BasedComplex, MultiDegree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KhError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error("vertices are not adjacent by a single 0 -> 1 flip")]
    NotAdjacent,
    #[error("differential entry {from} -> {to} violates the filtration: {what}")]
    Filtration { from: usize, to: usize, what: String },
    #[error("diagram has {0} crossings; at most 20 are supported")]
    TooLarge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Plus,
    Minus,
}

impl Label {
    pub fn value(self) -> i64 {
        match self {
            Label::Plus => 1,
            Label::Minus => -1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Plus => "+",
            Label::Minus => "-",
        })
    }
}

/// `m`: `++ -> +`, `+- -> -`, `-+ -> -`, `-- -> 0`.
pub fn merge_action(a: Label, b: Label) -> Option<Label> {
    match (a, b) {
        (Label::Plus, Label::Plus) => Some(Label::Plus),
        (Label::Minus, Label::Minus) => None,
        _ => Some(Label::Minus),
    }
}

/// `Δ`: `+ -> +- + -+`, `- -> --`.
pub fn split_action(a: Label) -> Vec<(Label, Label)> {
    match a {
        Label::Plus => vec![(Label::Plus, Label::Minus), (Label::Minus, Label::Plus)],
        Label::Minus => vec![(Label::Minus, Label::Minus)],
    }
}

/// `(-1)^(S_1 + ... + S_{j-1})` for the edge flipping coordinate `j`.
pub fn edge_sign(s: &[u8], s_prime: &[u8]) -> Result<i64, KhError> {
    if s.len() != s_prime.len() {
        return Err(KhError::NotAdjacent);
    }
    let diff: Vec<usize> = (0..s.len()).filter(|&i| s[i] != s_prime[i]).collect();
    match diff.as_slice() {
        [j] if s[*j] == 0 && s_prime[*j] == 1 => {
            let before: u32 = s[..*j].iter().map(|&x| x as u32).sum();
            Ok(if before.is_multiple_of(2) { 1 } else { -1 })
        }
        _ => Err(KhError::NotAdjacent),
    }
}

fn edge_sign_bits(v: u64, j: usize) -> i64 {
    if (v & ((1u64 << j) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// An enhanced state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub vertex: u64,
    pub labels: Vec<Label>,
    pub degree: MultiDegree,
}

impl Generator {
    pub fn vertex_bits(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| (self.vertex >> i & 1) as u8).collect()
    }
}

#[derive(Clone, Debug)]
pub struct KhovanovComplex {
    pub n_crossings: usize,
    pub n_punctures: usize,
    pub signs: CrossingSigns,
    pub generators: Vec<Generator>,
    pub complex: BasedComplex,
    /// First generator index of each vertex, plus a final sentinel.
    pub offsets: Vec<usize>,
}

impl KhovanovComplex {
    /// Indices of generators at vertex `v`.
    pub fn vertex_range(&self, v: u64) -> std::ops::Range<usize> {
        self.offsets[v as usize]..self.offsets[v as usize + 1]
    }

    /// Dense block of the differential from vertex `from` to vertex `to`,
    /// rows indexed by targets.
    pub fn block(&self, from: u64, to: u64) -> Vec<Vec<i64>> {
        let (rs, cs) = (self.vertex_range(to), self.vertex_range(from));
        let mut m = vec![vec![0i64; cs.len()]; rs.len()];
        for (jc, src) in cs.clone().enumerate() {
            for (tgt, c) in &self.complex.differential[src] {
                if rs.contains(tgt) {
                    m[tgt - rs.start][jc] = c.to_integer().try_into().unwrap();
                }
            }
        }
        m
    }

    /// `(source, target, coefficient)` triples in basis order.
    pub fn dump(&self) -> Vec<(usize, usize, i64)> {
        self.complex.entries().map(|(i, j, c)| (i, j, c.to_integer().try_into().unwrap())).collect()
    }
}

pub fn degree_of(
    res: &Resolution,
    labels: &[Label],
    vertex: u64,
    n_punctures: usize,
    signs: &CrossingSigns,
) -> MultiDegree {
    let s = vertex.count_ones() as i64;
    let h = s - signs.n_minus as i64;
    let sum: i64 = labels.iter().map(|l| l.value()).sum();
    let q = sum + h + signs.writhe;
    let mut gsigma = vec![0i64; n_punctures];
    let mut phi: BTreeMap<PunctureSet, i64> = BTreeMap::new();
    for (c, l) in res.circles.iter().zip(labels) {
        for i in c.enclosure.indices() {
            gsigma[i] += l.value();
        }
        if !c.enclosure.is_empty() {
            *phi.entry(c.enclosure).or_insert(0) += l.value();
        }
    }
    phi.retain(|_, v| *v != 0);
    MultiDegree { h, q, gsigma, phi }
}

fn labels_of(code: usize, k: usize) -> Vec<Label> {
    (0..k).map(|i| if code >> (k - 1 - i) & 1 == 1 { Label::Minus } else { Label::Plus }).collect()
}

fn code_of(labels: &[Label]) -> usize {
    labels.iter().fold(0, |acc, l| acc << 1 | (*l == Label::Minus) as usize)
}

/// For every circle at `v`, the index of the circle at `w` it persists as,
/// or `None` for circles touching the flipped crossing.
fn circle_map(rv: &Resolution, rw: &Resolution, touching: &[usize]) -> Vec<Option<usize>> {
    let traced_v = rv.circles.iter().filter(|c| !c.segments.is_empty()).count();
    let traced_w = rw.circles.iter().filter(|c| !c.segments.is_empty()).count();
    rv.circles
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if touching.contains(&k) {
                None
            } else if c.segments.is_empty() {
                Some(k - traced_v + traced_w)
            } else {
                Some(rw.circle_of(c.segments[0].0))
            }
        })
        .collect()
}

pub fn build_complex(d: &Diagram) -> Result<KhovanovComplex, KhError> {
    let n = d.n_crossings();
    if n > 20 {
        return Err(KhError::TooLarge(n));
    }
    let np = d.n_punctures();
    let signs = d.crossing_signs();
    let resolutions: Vec<Resolution> = (0..1u64 << n).map(|v| d.resolve_bits(v)).collect();
    let mut offsets = Vec::with_capacity(resolutions.len() + 1);
    let mut generators = Vec::new();
    for (v, res) in resolutions.iter().enumerate() {
        offsets.push(generators.len());
        let k = res.len();
        for code in 0..1usize << k {
            let labels = labels_of(code, k);
            let degree = degree_of(res, &labels, v as u64, np, &signs);
            generators.push(Generator { vertex: v as u64, labels, degree });
        }
    }
    offsets.push(generators.len());

    let mut differential = vec![Vec::new(); generators.len()];
    for (v, rv) in resolutions.iter().enumerate() {
        let v = v as u64;
        for j in 0..n {
            if v >> j & 1 == 1 {
                continue;
            }
            let w = v | 1 << j;
            let rw = &resolutions[w as usize];
            let sign = rat(edge_sign_bits(v, j));
            let arcs = d.crossings()[j];
            let mut at_v: Vec<usize> = arcs.iter().map(|&a| rv.circle_of(a)).collect();
            at_v.sort_unstable();
            at_v.dedup();
            let mut at_w: Vec<usize> = arcs.iter().map(|&a| rw.circle_of(a)).collect();
            at_w.sort_unstable();
            at_w.dedup();
            let map = circle_map(rv, rw, &at_v);
            let kw = rw.len();
            for code in 0..1usize << rv.len() {
                let src = offsets[v as usize] + code;
                let labels = &generators[src].labels;
                let mut base = vec![Label::Plus; kw];
                for (k, m) in map.iter().enumerate() {
                    if let Some(m) = m {
                        base[*m] = labels[k];
                    }
                }
                let targets: Vec<Vec<Label>> = match (at_v.as_slice(), at_w.as_slice()) {
                    ([a, b], [m]) => merge_action(labels[*a], labels[*b])
                        .map(|l| {
                            let mut t = base.clone();
                            t[*m] = l;
                            t
                        })
                        .into_iter()
                        .collect(),
                    ([a], [m1, m2]) => split_action(labels[*a])
                        .into_iter()
                        .map(|(l1, l2)| {
                            let mut t = base.clone();
                            t[*m1] = l1;
                            t[*m2] = l2;
                            t
                        })
                        .collect(),
                    _ => unreachable!("a single flip always merges or splits"),
                };
                for t in targets {
                    differential[src].push((offsets[w as usize] + code_of(&t), sign.clone()));
                }
            }
        }
        for row in &mut differential[offsets[v as usize]..offsets[v as usize + 1]] {
            row.sort_by_key(|e| e.0);
        }
    }
    let complex = BasedComplex { degrees: generators.iter().map(|g| g.degree.clone()).collect(), differential };
    let kc = KhovanovComplex { n_crossings: n, n_punctures: np, signs, generators, complex, offsets };
    check_filtrations(&kc)?;
    Ok(kc)
}

/// Sum of the coefficients of a Φ value.
pub fn epsilon_phi(phi: &BTreeMap<PunctureSet, i64>) -> i64 {
    phi.values().sum()
}

/// Every entry raises h by one, preserves q, lowers each puncture grading by
/// 0 or 2, weakly lowers ε∘Φ, and keeps `gsigma` when it keeps Φ.
pub fn check_filtrations(kc: &KhovanovComplex) -> Result<(), KhError> {
    let g = &kc.complex.degrees;
    for (i, j, _) in kc.complex.entries() {
        let bad = |what: &str| KhError::Filtration { from: i, to: j, what: what.into() };
        let (a, b) = (&g[i], &g[j]);
        if b.h != a.h + 1 {
            return Err(bad("h not raised by one"));
        }
        if b.q != a.q {
            return Err(bad("q changed"));
        }
        if a.gsigma.iter().zip(&b.gsigma).any(|(x, y)| !(x - y == 0 || x - y == 2)) {
            return Err(bad("a puncture grading did not drop by 0 or 2"));
        }
        if epsilon_phi(&b.phi) > epsilon_phi(&a.phi) {
            return Err(bad("ε∘Φ increased"));
        }
        if a.phi == b.phi && a.gsigma != b.gsigma {
            return Err(bad("Φ preserved but gsigma changed"));
        }
    }
    Ok(())
}

/// Original APS gradings of a generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApsGradings {
    pub i: i64,
    pub j: i64,
    pub tau: i64,
    pub psi: BTreeMap<PunctureSet, i64>,
}

pub fn aps_original_gradings(g: &Generator, d: &Diagram) -> ApsGradings {
    let n = d.n_crossings() as i64;
    let ones = g.vertex.count_ones() as i64;
    let i = (n - ones) - ones;
    let res = d.resolve_bits(g.vertex);
    let mut tau = 0;
    for (c, l) in res.circles.iter().zip(&g.labels) {
        if c.is_trivial() {
            tau -= l.value();
        }
    }
    let psi = g.degree.phi.iter().map(|(k, v)| (*k, -v)).collect();
    ApsGradings { i, j: i + 2 * tau, tau, psi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::SparseMatrix;

    fn hopf() -> Diagram {
        Diagram::parse(r#"{"punctures":0,"crossings":[[4,1,3,2],[2,3,1,4]]}"#).unwrap()
    }

    fn hopf2() -> Diagram {
        Diagram::parse(r#"{"punctures":2,"crossings":[[4,1,3,2],[2,3,1,4]],"arc_rays":{"1":[1,0],"3":[0,1]}}"#).unwrap()
    }

    #[test]
    fn edge_signs() {
        assert_eq!(edge_sign(&[0, 0], &[1, 0]).unwrap(), 1);
        assert_eq!(edge_sign(&[1, 0], &[1, 1]).unwrap(), -1);
        assert_eq!(edge_sign(&[0, 1, 1], &[1, 1, 1]).unwrap(), 1);
        assert!(edge_sign(&[0, 0], &[1, 1]).is_err());
        assert!(edge_sign(&[1, 0], &[0, 0]).is_err());
    }

    #[test]
    fn frobenius_tables() {
        use Label::*;
        assert_eq!(merge_action(Plus, Plus), Some(Plus));
        assert_eq!(merge_action(Minus, Plus), Some(Minus));
        assert_eq!(merge_action(Plus, Minus), Some(Minus));
        assert_eq!(merge_action(Minus, Minus), None);
        assert_eq!(split_action(Plus), vec![(Plus, Minus), (Minus, Plus)]);
        assert_eq!(split_action(Minus), vec![(Minus, Minus)]);
    }

    #[test]
    fn split_then_merge() {
        use Label::*;
        // m∘Δ(v_-) = 0 and m∘Δ(v_+) = 2 v_-
        let md = |l| -> BTreeMap<Label, i64> {
            let mut acc = BTreeMap::new();
            for (a, b) in split_action(l) {
                if let Some(r) = merge_action(a, b) {
                    *acc.entry(r).or_insert(0) += 1;
                }
            }
            acc
        };
        assert!(md(Minus).is_empty());
        assert_eq!(md(Plus), BTreeMap::from([(Minus, 2)]));
    }

    #[test]
    fn unknot_complex() {
        let d = Diagram::parse(r#"{"punctures":0,"crossings":[],"free_loops":[[]]}"#).unwrap();
        let kc = build_complex(&d).unwrap();
        let hq: Vec<(i64, i64)> = kc.generators.iter().map(|g| (g.degree.h, g.degree.q)).collect();
        assert_eq!(hq, vec![(0, 1), (0, -1)]);
        assert_eq!(kc.dump(), vec![]);
    }

    #[test]
    fn hopf_matrices() {
        let kc = build_complex(&hopf()).unwrap();
        assert_eq!(kc.generators.len(), 12);
        // middle terms ordered (1,0) then (0,1), i.e. vertices 1 and 2
        let mut first = kc.block(0, 1);
        first.extend(kc.block(0, 2));
        assert_eq!(first, vec![vec![1, 0, 0, 0], vec![0, 1, 1, 0], vec![1, 0, 0, 0], vec![0, 1, 1, 0]]);
        let second: Vec<Vec<i64>> =
            kc.block(1, 3).into_iter().zip(kc.block(2, 3)).map(|(a, b)| a.into_iter().chain(b).collect()).collect();
        assert_eq!(second, vec![vec![0, 0, 0, 0], vec![-1, 0, 1, 0], vec![-1, 0, 1, 0], vec![0, -1, 0, 1]]);
        assert_eq!(SparseMatrix::from_dense(&first).rank(), 2);
        assert!(kc.complex.d_squared().is_empty());
    }

    #[test]
    fn two_puncture_gsigma_values() {
        let kc = build_complex(&hopf2()).unwrap();
        let at =
            |v: u64| -> Vec<Vec<i64>> { kc.vertex_range(v).map(|i| kc.generators[i].degree.gsigma.clone()).collect() };
        assert_eq!(at(0), vec![vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]]);
        assert_eq!(at(3), vec![vec![1, 1], vec![1, 1], vec![-1, -1], vec![-1, -1]]);
        assert_eq!(at(1), vec![vec![1, 1], vec![-1, -1]]);
    }

    #[test]
    fn aps_conversion_on_hopf2() {
        let d = hopf2();
        let kc = build_complex(&d).unwrap();
        for g in &kc.generators {
            let a = aps_original_gradings(g, &d);
            assert_eq!(2 * (g.degree.h + kc.signs.n_minus as i64), d.n_crossings() as i64 - a.i);
            assert_eq!(g.degree.q, -(-epsilon_phi(&g.degree.phi) + a.tau) + g.degree.h + kc.signs.writhe);
            assert_eq!(a.psi.iter().map(|(k, v)| (*k, -v)).collect::<BTreeMap<_, _>>(), g.degree.phi);
            assert_eq!(a.j, a.i + 2 * a.tau);
        }
    }
}
