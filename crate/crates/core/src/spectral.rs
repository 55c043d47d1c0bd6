//! Spectral sequences of Z-filtered based complexes, obtained by flattening
//! multi-gradings with ε (the sum of components), and the comparison
//! scenarios between the refined homologies.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_traits::Zero;

use serde_json::{json, Value};
use thiserror::Error;

use crate::diagram::{Diagram, PunctureSet};
use crate::exactalg::{span_rank, BasedComplex, MultiDegree, SparseMatrix, SparseVec};
use crate::homology::{graded_complex, table_of, HomologyError, HomologyTable, Theory};
use crate::khovanov::{build_complex, epsilon_phi};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error("differential entry {from} -> {to} increases the flattened grading")]
    Increasing { from: usize, to: usize },
    #[error("page bound must be nonnegative, got {0}")]
    NegativePage(i64),
    #[error("puncture subset {0:?} is not contained in 1..={1}")]
    BadSubset(Vec<usize>, usize),
}

impl From<crate::khovanov::KhError> for SpectralError {
    fn from(e: crate::khovanov::KhError) -> Self {
        SpectralError::Homology(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlattenBase {
    GSigma,
    Phi,
    /// The 1-based punctures whose gsigma coordinates are summed.
    GSigmaSubset(Vec<usize>),
}

impl FlattenBase {
    pub fn value(&self, g: &MultiDegree) -> i64 {
        match self {
            FlattenBase::GSigma => g.gsigma.iter().sum(),
            FlattenBase::Phi => epsilon_phi(&g.phi),
            FlattenBase::GSigmaSubset(s) => s.iter().map(|&i| g.gsigma[i - 1]).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlattenedGrading {
    pub base: FlattenBase,
    pub values: Vec<i64>,
}

pub fn flatten(c: &BasedComplex, base: FlattenBase) -> Result<FlattenedGrading, SpectralError> {
    let values: Vec<i64> = c.degrees.iter().map(|g| base.value(g)).collect();
    for (i, j, _) in c.entries() {
        if values[j] > values[i] {
            return Err(SpectralError::Increasing { from: i, to: j });
        }
    }
    Ok(FlattenedGrading { base, values })
}

/// Ranks keyed by filtration level `p`, then `(h, q)`.
pub type Page = BTreeMap<(i64, i64, i64), usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    /// Fine homology regrouped by `(ε(key), h, q)`.
    pub e1_expected: Page,
    /// Coarse homology totals by `(h, q)`.
    pub e_infinity_expected: BTreeMap<(i64, i64), usize>,
    pub e1_matches: bool,
    pub e_infinity_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralReport {
    /// `pages[r]` is `E_r`.
    pub pages: Vec<Page>,
    pub e_infinity: Page,
    /// First page from which all pages coincide with `E_∞`.
    pub stabilized_at: usize,
    pub target: Option<Comparison>,
}

fn totals<K: Ord + Clone>(page: &Page, key: impl Fn(i64, i64, i64) -> K) -> BTreeMap<K, usize> {
    let mut out = BTreeMap::new();
    for (&(p, h, q), &r) in page {
        *out.entry(key(p, h, q)).or_insert(0) += r;
    }
    out
}

impl SpectralReport {
    pub fn page(&self, r: usize) -> &Page {
        self.pages.get(r).unwrap_or(&self.e_infinity)
    }

    pub fn totals_by_h(page: &Page) -> BTreeMap<i64, usize> {
        totals(page, |_, h, _| h)
    }

    pub fn totals_by_hq(page: &Page) -> BTreeMap<(i64, i64), usize> {
        totals(page, |_, h, q| (h, q))
    }

    /// The page projected to `(p, h)` cells.
    pub fn by_ph(page: &Page) -> BTreeMap<(i64, i64), usize> {
        totals(page, |p, h, _| (p, h))
    }

    pub fn to_json(&self) -> Value {
        let page_json = |pg: &Page| -> Value {
            Value::Array(pg.iter().map(|((p, h, q), r)| json!({"p": p, "h": h, "q": q, "rank": r})).collect())
        };
        let mut v = json!({
            "pages": self.pages.iter().enumerate().map(|(r, pg)| json!({"r": r, "ranks": page_json(pg)})).collect::<Vec<_>>(),
            "e_infinity": page_json(&self.e_infinity),
            "stabilized_at": self.stabilized_at,
        });
        if let Some(t) = &self.target {
            v["target"] = json!({
                "e1": page_json(&t.e1_expected),
                "e_infinity_totals": t.e_infinity_expected.iter().map(|((h, q), r)| json!({"h": h, "q": q, "rank": r})).collect::<Vec<_>>(),
                "e1_matches": t.e1_matches,
                "e_infinity_matches": t.e_infinity_matches,
            });
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let render = |s: &mut String, name: String, pg: &Page| {
            *s += &format!("{name}\n{:>4} {:>4} {:>4} {:>5}\n", "p", "h", "q", "rank");
            for ((p, h, q), r) in pg {
                *s += &format!("{p:>4} {h:>4} {q:>4} {r:>5}\n");
            }
            let t = Self::totals_by_h(pg);
            *s += &format!(
                "totals by h: {}\n\n",
                t.iter().map(|(h, r)| format!("{h}:{r}")).collect::<Vec<_>>().join(" ")
            );
        };
        for (r, pg) in self.pages.iter().enumerate() {
            render(&mut s, format!("E{r}"), pg);
        }
        render(&mut s, "E_inf".into(), &self.e_infinity);
        s += &format!("stabilized at E{}\n", self.stabilized_at);
        if let Some(t) = &self.target {
            s += &format!("E1 matches fine homology: {}\n", t.e1_matches);
            s += &format!("E_inf matches coarse homology: {}\n", t.e_infinity_matches);
        }
        s
    }
}

struct PageEngine<'a> {
    c: &'a BasedComplex,
    values: &'a [i64],
    /// Distinct filtration values, increasing.
    levels: Vec<i64>,
    blocks: HashMap<(i64, i64), Vec<usize>>,
    z: HashMap<(i64, i64, i64, i64), Rc<Vec<SparseVec>>>,
    ranks: HashMap<(i64, i64, [i64; 4]), usize>,
}

impl<'a> PageEngine<'a> {
    fn new(c: &'a BasedComplex, values: &'a [i64]) -> Self {
        let mut blocks: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, g) in c.degrees.iter().enumerate() {
            blocks.entry((g.h, g.q)).or_default().push(i);
        }
        let mut levels = values.to_vec();
        levels.sort_unstable();
        levels.dedup();
        PageEngine { c, values, levels, blocks, z: HashMap::new(), ranks: HashMap::new() }
    }

    /// Largest level `≤ x`, or one below the smallest level.
    fn floor(&self, x: i64) -> i64 {
        match self.levels.partition_point(|&l| l <= x) {
            0 => self.levels.first().map_or(x, |l| l - 1),
            k => self.levels[k - 1],
        }
    }

    /// Basis of `Z_r^p = {x ∈ F_p : dx ∈ F_{p-r}}` in the `(h, q)` block.
    fn z(&mut self, h: i64, q: i64, p: i64, r: i64) -> Rc<Vec<SparseVec>> {
        let (p, cut) = (self.floor(p), self.floor(p - r));
        if let Some(v) = self.z.get(&(h, q, p, cut)) {
            return v.clone();
        }
        let dom: Vec<usize> = self
            .blocks
            .get(&(h, q))
            .map(|b| b.iter().copied().filter(|&i| self.values[i] <= p).collect())
            .unwrap_or_default();
        let mut m = SparseMatrix::zeros(self.c.len(), dom.len());
        for (col, &i) in dom.iter().enumerate() {
            for (j, c) in &self.c.differential[i] {
                if self.values[*j] > cut {
                    m.set(*j, col, c.clone());
                }
            }
        }
        let basis: Rc<Vec<SparseVec>> =
            Rc::new(m.kernel().into_iter().map(|k| k.into_iter().map(|(col, c)| (dom[col], c)).collect()).collect());
        self.z.insert((h, q, p, cut), basis.clone());
        basis
    }

    fn d(&self, x: &SparseVec) -> SparseVec {
        let mut y = SparseVec::new();
        for (&i, c) in x {
            for (j, e) in &self.c.differential[i] {
                let t = y.entry(*j).or_default();
                *t += c * e;
                if t.is_zero() {
                    y.remove(j);
                }
            }
        }
        y
    }

    fn rank(&mut self, h: i64, q: i64, p: i64, r: i64) -> usize {
        let key = (h, q, [self.floor(p), self.floor(p - 1), self.floor(p - r), self.floor(p + r - 1)]);
        if let Some(&k) = self.ranks.get(&key) {
            return k;
        }
        let z = self.z(h, q, p, r).len();
        let k = if z == 0 {
            0
        } else {
            let below = self.z(h, q, p - 1, r - 1);
            let prev: Vec<SparseVec> = self.z(h - 1, q, p + r - 1, r - 1).iter().map(|x| self.d(x)).collect();
            z - span_rank(below.iter().chain(&prev))
        };
        self.ranks.insert(key, k);
        k
    }

    fn page(&mut self, r: i64) -> Page {
        let mut cells: Vec<(i64, i64, i64)> =
            self.c.degrees.iter().zip(self.values).map(|(g, &p)| (p, g.h, g.q)).collect();
        cells.sort_unstable();
        cells.dedup();
        let mut out = Page::new();
        for (p, h, q) in cells {
            let k = self.rank(h, q, p, r);
            if k > 0 {
                out.insert((p, h, q), k);
            }
        }
        out
    }
}

/// Pages `E_0..=E_{r_max}` of the filtration `F_p = span{g : f(g) ≤ p}`, plus `E_∞`.
pub fn pages(c: &BasedComplex, f: &FlattenedGrading, r_max: i64) -> Result<SpectralReport, SpectralError> {
    if r_max < 0 {
        return Err(SpectralError::NegativePage(r_max));
    }
    for (i, j, _) in c.entries() {
        if f.values[j] > f.values[i] {
            return Err(SpectralError::Increasing { from: i, to: j });
        }
    }
    let width = match (f.values.iter().min(), f.values.iter().max()) {
        (Some(a), Some(b)) => b - a,
        _ => 0,
    };
    let last = width + 1;
    let mut eng = PageEngine::new(c, &f.values);
    let e_infinity = eng.page(last);
    // pages only shrink cell by cell, so equality with E_inf is final
    let mut computed = Vec::new();
    let mut stabilized_at = last as usize;
    for r in 0..=last {
        let pg = eng.page(r);
        let done = pg == e_infinity;
        computed.push(pg);
        if done {
            stabilized_at = r as usize;
            break;
        }
    }
    computed.resize(r_max as usize + 1, e_infinity.clone());
    Ok(SpectralReport { pages: computed, e_infinity, stabilized_at, target: None })
}

/// Projects gsigma to the kept punctures (1-based, renumbered in increasing
/// order) and intersects Φ keys with them, dropping empty keys.
pub fn fill_punctures(c: &BasedComplex, keep: &[usize]) -> Result<BasedComplex, SpectralError> {
    let n = c.degrees.first().map_or(0, |g| g.gsigma.len());
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k == 0 || k > n) {
        return Err(SpectralError::BadSubset(keep, n));
    }
    let project = |s: PunctureSet| -> PunctureSet {
        PunctureSet::from_indices(keep.iter().enumerate().filter(|(_, &k)| s.contains(k - 1)).map(|(i, _)| i))
    };
    let degrees = c
        .degrees
        .iter()
        .map(|g| {
            let mut phi = BTreeMap::new();
            for (&s, &v) in &g.phi {
                let t = project(s);
                if !t.is_empty() {
                    *phi.entry(t).or_insert(0) += v;
                }
            }
            phi.retain(|_, v| *v != 0);
            MultiDegree { h: g.h, q: g.q, gsigma: keep.iter().map(|&k| g.gsigma[k - 1]).collect(), phi }
        })
        .collect();
    Ok(BasedComplex { degrees, differential: c.differential.clone() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scenario {
    ApsToMkh,
    /// 1-based puncture kept.
    MkhToAkh(usize),
    MkhToKh,
    /// 1-based punctures kept.
    MkhToMkh(Vec<usize>),
}

/// Runs the spectral sequence from a fine homology to a coarser one: the
/// complex graded by the coarse grading, filtered by ε of the fine one.
pub fn scenario(d: &Diagram, which: &Scenario) -> Result<SpectralReport, SpectralError> {
    let kc = build_complex(d)?;
    let c = &kc.complex;
    let n = d.n_punctures();
    let (fine, coarse_complex, coarse_theory, base) = match which {
        Scenario::ApsToMkh => {
            (table_of(c, Theory::ApsTilde)?, graded_complex(c, Theory::MKh)?, Theory::MKh, FlattenBase::Phi)
        }
        Scenario::MkhToAkh(k) => {
            let t = Theory::AKh(*k);
            (table_of(c, Theory::MKh)?, graded_complex(c, t)?, t, FlattenBase::GSigma)
        }
        Scenario::MkhToKh => (table_of(c, Theory::MKh)?, c.clone(), Theory::Kh, FlattenBase::GSigma),
        Scenario::MkhToMkh(keep) => {
            if keep.iter().any(|&k| k == 0 || k > n) {
                return Err(SpectralError::BadSubset(keep.clone(), n));
            }
            let filled = fill_punctures(c, keep)?;
            let gr = graded_complex(&filled, Theory::MKh)?;
            let with_full = BasedComplex { degrees: c.degrees.clone(), differential: gr.differential };
            (table_of(c, Theory::MKh)?, with_full, Theory::MKh, FlattenBase::GSigma)
        }
    };
    let coarse: HomologyTable = match which {
        Scenario::MkhToMkh(keep) => table_of(&fill_punctures(c, keep)?, Theory::MKh)?,
        _ => table_of(c, coarse_theory)?,
    };
    let f = flatten(&coarse_complex, base)?;
    let width = f.values.iter().max().zip(f.values.iter().min()).map_or(0, |(a, b)| a - b);
    let mut report = pages(&coarse_complex, &f, width + 1)?;
    let e1_expected: Page = fine.flattened().into_iter().map(|((h, q, p), r)| ((p, h, q), r)).collect();
    let e_infinity_expected = coarse.totals_by_hq();
    report.target = Some(Comparison {
        e1_matches: *report.page(1) == e1_expected,
        e_infinity_matches: SpectralReport::totals_by_hq(&report.e_infinity) == e_infinity_expected,
        e1_expected,
        e_infinity_expected,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn deg(h: i64, gsigma: Vec<i64>) -> MultiDegree {
        MultiDegree { h, q: 0, gsigma, phi: BTreeMap::new() }
    }

    fn hopf2() -> Diagram {
        Diagram::parse(r#"{"punctures":2,"crossings":[[4,1,3,2],[2,3,1,4]],"arc_rays":{"1":[1,0],"3":[0,1]}}"#).unwrap()
    }

    #[test]
    fn flatten_values() {
        let c = BasedComplex {
            degrees: vec![deg(0, vec![1, -1]), deg(0, vec![-1, -1])],
            differential: vec![vec![], vec![]],
        };
        assert_eq!(flatten(&c, FlattenBase::GSigma).unwrap().values, vec![0, -2]);
        let mut g = MultiDegree::default();
        g.phi.insert(PunctureSet::from_indices([0]), 1);
        g.phi.insert(PunctureSet::from_indices([0, 1]), -1);
        assert_eq!(FlattenBase::Phi.value(&g), 0);
    }

    #[test]
    fn increasing_entry_rejected() {
        let c = BasedComplex {
            degrees: vec![deg(0, vec![-1]), deg(1, vec![1])],
            differential: vec![vec![(1, rat(1))], vec![]],
        };
        assert!(matches!(flatten(&c, FlattenBase::GSigma), Err(SpectralError::Increasing { .. })));
    }

    #[test]
    fn zero_differential_is_constant() {
        let c = BasedComplex {
            degrees: vec![deg(0, vec![1]), deg(0, vec![-1]), deg(1, vec![1])],
            differential: vec![vec![], vec![], vec![]],
        };
        let f = flatten(&c, FlattenBase::GSigma).unwrap();
        let rep = pages(&c, &f, 3).unwrap();
        assert!(rep.pages.iter().all(|p| *p == rep.pages[0]));
        assert_eq!(rep.stabilized_at, 0);
        assert_eq!(rep.pages[0], Page::from([((-1, 0, 0), 1), ((1, 0, 0), 1), ((1, 1, 0), 1)]));
        assert!(matches!(pages(&c, &f, -1), Err(SpectralError::NegativePage(-1))));
    }

    #[test]
    fn filtered_pair_cancels_late() {
        // d x = y with f(x) = 2, f(y) = 0: survives to E_2, dies at E_3
        let c = BasedComplex {
            degrees: vec![deg(0, vec![1, 1]), deg(1, vec![-1, 1])],
            differential: vec![vec![(1, rat(1))], vec![]],
        };
        let f = flatten(&c, FlattenBase::GSigma).unwrap();
        let rep = pages(&c, &f, 4).unwrap();
        let tot: Vec<usize> = rep.pages.iter().map(|p| p.values().sum()).collect();
        assert_eq!(tot, vec![2, 2, 2, 0, 0]);
        assert_eq!(rep.stabilized_at, 3);
    }

    #[test]
    fn hopf2_to_kh() {
        let rep = scenario(&hopf2(), &Scenario::MkhToKh).unwrap();
        let t = rep.target.as_ref().unwrap();
        assert!(t.e1_matches && t.e_infinity_matches);
        assert_eq!(SpectralReport::totals_by_h(rep.page(1)), BTreeMap::from([(-2, 3), (-1, 1), (0, 2)]));
        assert_eq!(SpectralReport::totals_by_h(&rep.e_infinity), BTreeMap::from([(-2, 2), (0, 2)]));
    }

    #[test]
    fn fill_all_is_identity() {
        let kc = build_complex(&hopf2()).unwrap();
        assert_eq!(fill_punctures(&kc.complex, &[1, 2]).unwrap(), kc.complex);
        assert!(fill_punctures(&kc.complex, &[3]).is_err());
    }
}
