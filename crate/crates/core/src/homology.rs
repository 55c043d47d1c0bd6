//! Rank tables of Kh, AKh, MKh and ÃPS, graded Euler characteristics, and
//! the map χ_h sending subset variables to products of puncture variables.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde_json::{json, Value};
use thiserror::Error;

use crate::diagram::{Diagram, PunctureSet};
use crate::exactalg::{BasedComplex, MultiDegree};
use crate::khovanov::{build_complex, epsilon_phi, KhError, KhovanovComplex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error(transparent)]
    Khovanov(#[from] KhError),
    #[error("puncture index {index} out of range 1..={n}")]
    BadPuncture { index: usize, n: usize },
}

impl From<crate::exactalg::AlgError> for HomologyError {
    fn from(e: crate::exactalg::AlgError) -> Self {
        HomologyError::Khovanov(e.into())
    }
}

impl From<crate::diagram::DiagramError> for HomologyError {
    fn from(e: crate::diagram::DiagramError) -> Self {
        HomologyError::Khovanov(e.into())
    }
}

/// Which homology. `AKh` carries the 1-based puncture it keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theory {
    Kh,
    AKh(usize),
    MKh,
    ApsTilde,
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theory::Kh => write!(f, "Kh"),
            Theory::AKh(_) => write!(f, "AKh"),
            Theory::MKh => write!(f, "MKh"),
            Theory::ApsTilde => write!(f, "APS~"),
        }
    }
}

/// The extra grading beyond `(h, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DegreeKey {
    None,
    Annular(i64),
    Multi(Vec<i64>),
    Phi(BTreeMap<PunctureSet, i64>),
}

impl DegreeKey {
    pub fn of(theory: Theory, g: &MultiDegree) -> DegreeKey {
        match theory {
            Theory::Kh => DegreeKey::None,
            Theory::AKh(k) => DegreeKey::Annular(g.gsigma[k - 1]),
            Theory::MKh => DegreeKey::Multi(g.gsigma.clone()),
            Theory::ApsTilde => DegreeKey::Phi(g.phi.clone()),
        }
    }

    /// ε of the key: the sum of its components.
    pub fn flatten(&self) -> i64 {
        match self {
            DegreeKey::None => 0,
            DegreeKey::Annular(k) => *k,
            DegreeKey::Multi(v) => v.iter().sum(),
            DegreeKey::Phi(m) => epsilon_phi(m),
        }
    }

    /// The monomial in y- or x-variables this key contributes to χ.
    pub fn monomial(&self, theory: Theory) -> Monomial {
        let mut m = Monomial::new();
        match (self, theory) {
            (DegreeKey::Annular(k), Theory::AKh(i)) => {
                m.insert(Var::Y(i), *k);
            }
            (DegreeKey::Multi(v), _) => {
                for (i, &e) in v.iter().enumerate() {
                    m.insert(Var::Y(i + 1), e);
                }
            }
            (DegreeKey::Phi(p), _) => {
                for (&s, &c) in p {
                    m.insert(Var::X(s), c);
                }
            }
            _ => {}
        }
        m.retain(|_, e| *e != 0);
        m
    }

    pub fn to_json(&self) -> Value {
        match self {
            DegreeKey::None => Value::Null,
            DegreeKey::Annular(k) => json!(k),
            DegreeKey::Multi(v) => json!(v),
            DegreeKey::Phi(m) => Value::Array(
                m.iter()
                    .map(|(s, c)| json!({"subset": s.indices().map(|i| i + 1).collect::<Vec<_>>(), "coeff": c}))
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for DegreeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeKey::None => Ok(()),
            DegreeKey::Annular(k) => write!(f, "{k}"),
            DegreeKey::Multi(v) => write!(f, "{}", v.iter().join(",")),
            DegreeKey::Phi(m) if m.is_empty() => write!(f, "0"),
            DegreeKey::Phi(m) => write!(f, "{}", m.iter().map(|(s, c)| format!("{s}:{c}")).join(" ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyTable {
    pub kind: Theory,
    pub ranks: BTreeMap<(i64, i64, DegreeKey), usize>,
}

impl HomologyTable {
    pub fn total(&self) -> usize {
        self.ranks.values().sum()
    }

    pub fn totals_by_h(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for ((h, _, _), r) in &self.ranks {
            *out.entry(*h).or_insert(0) += r;
        }
        out
    }

    pub fn totals_by_hq(&self) -> BTreeMap<(i64, i64), usize> {
        let mut out = BTreeMap::new();
        for ((h, q, _), r) in &self.ranks {
            *out.entry((*h, *q)).or_insert(0) += r;
        }
        out
    }

    /// Ranks regrouped by `(h, q, ε(key))`.
    pub fn flattened(&self) -> BTreeMap<(i64, i64, i64), usize> {
        let mut out = BTreeMap::new();
        for ((h, q, k), r) in &self.ranks {
            *out.entry((*h, *q, k.flatten())).or_insert(0) += r;
        }
        out
    }

    pub fn get(&self, h: i64, q: i64, key: &DegreeKey) -> usize {
        self.ranks.get(&(h, q, key.clone())).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let ranks: Vec<Value> =
            self.ranks.iter().map(|((h, q, k), r)| json!({"h": h, "q": q, "key": k.to_json(), "rank": r})).collect();
        json!({"kind": self.kind.to_string(), "ranks": ranks})
    }

    /// One row per nonzero rank, sorted by `(h, q, key)`: `h q rank key`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.kind);
        let keyed = !matches!(self.kind, Theory::Kh);
        s += &format!("{:>4} {:>4} {:>5}{}\n", "h", "q", "rank", if keyed { "  key" } else { "" });
        for ((h, q, k), r) in &self.ranks {
            if keyed {
                s += &format!("{h:>4} {q:>4} {r:>5}  {k}\n");
            } else {
                s += &format!("{h:>4} {q:>4} {r:>5}\n");
            }
        }
        s
    }
}

/// The graded complex whose homology is `theory`.
pub fn graded_complex(c: &BasedComplex, theory: Theory) -> Result<BasedComplex, HomologyError> {
    if let Some(g) = c.degrees.first() {
        check_theory(theory, g.gsigma.len())?;
    }
    Ok(match theory {
        Theory::Kh => c.clone(),
        Theory::AKh(k) => c.associated_graded(|g| vec![g.gsigma[k - 1]])?,
        Theory::MKh => c.associated_graded(|g| g.gsigma.clone())?,
        Theory::ApsTilde => c.associated_graded_by(|g| g.phi.clone(), |t, s| epsilon_phi(t) < epsilon_phi(s))?,
    })
}

fn check_theory(theory: Theory, n: usize) -> Result<(), HomologyError> {
    if let Theory::AKh(k) = theory {
        if k == 0 || k > n {
            return Err(HomologyError::BadPuncture { index: k, n });
        }
    }
    Ok(())
}

/// Homology of the graded complex of `c` for `theory`.
pub fn table_of(c: &BasedComplex, theory: Theory) -> Result<HomologyTable, HomologyError> {
    let gr = graded_complex(c, theory)?;
    let ranks = gr.homology_ranks(|g| (g.q, DegreeKey::of(theory, g)))?;
    Ok(HomologyTable { kind: theory, ranks: ranks.into_iter().map(|((h, (q, k)), r)| ((h, q, k), r)).collect() })
}

pub fn table(kc: &KhovanovComplex, theory: Theory) -> Result<HomologyTable, HomologyError> {
    check_theory(theory, kc.n_punctures)?;
    table_of(&kc.complex, theory)
}

pub fn compute(d: &Diagram, theory: Theory) -> Result<HomologyTable, HomologyError> {
    check_theory(theory, d.n_punctures())?;
    table(&build_complex(d)?, theory)
}

pub fn kh(d: &Diagram) -> Result<HomologyTable, HomologyError> {
    compute(d, Theory::Kh)
}

pub fn akh(d: &Diagram, keep: usize) -> Result<HomologyTable, HomologyError> {
    compute(d, Theory::AKh(keep))
}

pub fn mkh(d: &Diagram) -> Result<HomologyTable, HomologyError> {
    compute(d, Theory::MKh)
}

pub fn aps_tilde(d: &Diagram) -> Result<HomologyTable, HomologyError> {
    compute(d, Theory::ApsTilde)
}

/// Variables of Euler characteristics: `y_i` per puncture, `x_S` per subset class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Y(usize),
    X(PunctureSet),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Y(i) => write!(f, "y{i}"),
            Var::X(s) => write!(f, "x{s}"),
        }
    }
}

pub type Monomial = BTreeMap<Var, i64>;

/// Integer Laurent polynomial in `q` and the y/x variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    pub terms: BTreeMap<(i64, Monomial), i64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, q: i64, mut m: Monomial, c: i64) {
        m.retain(|_, e| *e != 0);
        let e = self.terms.entry((q, m.clone())).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&(q, m));
        }
    }

    /// Polynomial in `q` alone from `(exponent, coefficient)` pairs.
    pub fn from_q(terms: &[(i64, i64)]) -> Self {
        let mut p = Self::zero();
        for &(q, c) in terms {
            p.add_term(q, Monomial::new(), c);
        }
        p
    }

    /// Substitutes every variable with `f(var)`, a monomial.
    pub fn substitute(&self, f: impl Fn(Var) -> Monomial) -> Self {
        let mut p = Self::zero();
        for ((q, m), c) in &self.terms {
            let mut out = Monomial::new();
            for (v, e) in m {
                for (w, e2) in f(*v) {
                    *out.entry(w).or_insert(0) += e * e2;
                }
            }
            p.add_term(*q, out, *c);
        }
        p
    }

    /// Sets every y- and x-variable to one.
    pub fn at_variables_one(&self) -> Self {
        self.substitute(|_| Monomial::new())
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, ((q, m), c)) in self.terms.iter().enumerate() {
            let body = std::iter::once(format!("q^{q}")).chain(m.iter().map(|(v, e)| format!("{v}^{e}"))).join("*");
            let a = c.abs();
            let coef = if a == 1 { String::new() } else { format!("{a}*") };
            match (n, *c < 0) {
                (0, false) => write!(f, "{coef}{body}")?,
                (0, true) => write!(f, "-{coef}{body}")?,
                (_, false) => write!(f, " + {coef}{body}")?,
                (_, true) => write!(f, " - {coef}{body}")?,
            }
        }
        Ok(())
    }
}

/// `Σ (-1)^h q^q · monomial(key) · rank`.
pub fn euler(t: &HomologyTable) -> LaurentPoly {
    let mut p = LaurentPoly::zero();
    for ((h, q, k), r) in &t.ranks {
        let sign = if h.rem_euclid(2) == 0 { 1 } else { -1 };
        p.add_term(*q, k.monomial(t.kind), sign * *r as i64);
    }
    p
}

/// The same alternating sum taken over chain generators.
pub fn chain_euler(kc: &KhovanovComplex, theory: Theory) -> LaurentPoly {
    let mut p = LaurentPoly::zero();
    for g in &kc.complex.degrees {
        let sign = if g.h.rem_euclid(2) == 0 { 1 } else { -1 };
        p.add_term(g.q, DegreeKey::of(theory, g).monomial(theory), sign);
    }
    p
}

/// `x_S ↦ Π_{i∈S} y_i`; y-variables and `q` are unchanged.
pub fn chi_h(p: &LaurentPoly) -> LaurentPoly {
    p.substitute(|v| match v {
        Var::X(s) => s.indices().map(|i| (Var::Y(i + 1), 1)).collect(),
        y => Monomial::from([(y, 1)]),
    })
}
