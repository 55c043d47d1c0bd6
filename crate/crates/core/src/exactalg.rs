//! Exact linear algebra over the rationals and multi-graded based chain complexes.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::diagram::PunctureSet;

pub type Rational = BigRational;

/// Sparse vector: index -> nonzero coefficient.
pub type SparseVec = BTreeMap<usize, Rational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgError {
    #[error("differential entry {from} -> {to} does not raise h by one")]
    HomologicalDegree { from: usize, to: usize },
    #[error("differential entry {from} -> {to} changes the grading used for homology")]
    KeyNotPreserved { from: usize, to: usize },
    #[error("differential entry {from} -> {to} increases the filtration grading")]
    GradeIncreasing { from: usize, to: usize },
    #[error("generator index {0} out of range")]
    Index(usize),
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// `y += c * x`, dropping cancelled entries.
pub fn axpy(y: &mut SparseVec, c: &Rational, x: &SparseVec) {
    for (&i, v) in x {
        let e = y.entry(i).or_insert_with(Rational::zero);
        *e += c * v;
        if e.is_zero() {
            y.remove(&i);
        }
    }
}

/// A subspace kept in echelon form: each basis vector has a distinct leading
/// index with coefficient one. Vectors may carry a tracking vector recording
/// the combination of inputs they came from, which turns ranks into kernels.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, (SparseVec, SparseVec)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` (with tracking `t`) against the basis. Returns the residue.
    fn reduce(&self, mut v: SparseVec, mut t: SparseVec) -> (SparseVec, SparseVec) {
        let mut from = 0usize;
        loop {
            let lead = v.range(from..).map(|(&i, _)| i).find(|i| self.rows.contains_key(i));
            let Some(i) = lead else { break };
            let c = -v[&i].clone();
            let (bv, bt) = &self.rows[&i];
            axpy(&mut v, &c, bv);
            axpy(&mut t, &c, bt);
            from = i + 1;
        }
        (v, t)
    }

    /// Inserts `v`; returns `Some(t')` when `v` was already in the span, where
    /// `t'` is the tracking combination that reduced it to zero.
    pub fn insert_tracked(&mut self, v: SparseVec, t: SparseVec) -> Option<SparseVec> {
        let (v, t) = self.reduce(v, t);
        let Some((&lead, lc)) = v.iter().next() else { return Some(t) };
        let inv = Rational::one() / lc;
        let scale = |x: SparseVec| -> SparseVec { x.into_iter().map(|(k, c)| (k, c * &inv)).collect() };
        self.rows.insert(lead, (scale(v), scale(t)));
        None
    }

    /// Inserts `v`; returns whether the span grew.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        self.insert_tracked(v, SparseVec::new()).is_none()
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone(), SparseVec::new()).0.is_empty()
    }
}

/// Rank of the span of the given vectors.
pub fn span_rank<'a>(vectors: impl IntoIterator<Item = &'a SparseVec>) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v.clone());
    }
    e.rank()
}

/// Sparse matrix stored by columns; column `j` is the image of basis vector `j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols: vec![SparseVec::new(); cols] }
    }

    pub fn from_dense(m: &[Vec<i64>]) -> Self {
        let rows = m.len();
        let ncols = m.first().map_or(0, |r| r.len());
        let mut out = Self::zeros(rows, ncols);
        for (i, row) in m.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x != 0 {
                    out.cols[j].insert(i, rat(x));
                }
            }
        }
        out
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn set(&mut self, i: usize, j: usize, x: Rational) {
        if x.is_zero() {
            self.cols[j].remove(&i);
        } else {
            self.cols[j].insert(i, x);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.cols[j].get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| (0..self.ncols()).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn rank(&self) -> usize {
        span_rank(&self.cols)
    }

    /// A basis of the kernel.
    pub fn kernel(&self) -> Vec<SparseVec> {
        let mut e = Echelon::new();
        let mut out = Vec::new();
        for (j, c) in self.cols.iter().enumerate() {
            let t = SparseVec::from([(j, Rational::one())]);
            if let Some(k) = e.insert_tracked(c.clone(), t) {
                out.push(k);
            }
        }
        out
    }

    pub fn apply(&self, x: &SparseVec) -> SparseVec {
        let mut y = SparseVec::new();
        for (&j, c) in x {
            axpy(&mut y, c, &self.cols[j]);
        }
        y
    }
}

/// The multi-grading carried by a generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiDegree {
    pub h: i64,
    pub q: i64,
    pub gsigma: Vec<i64>,
    pub phi: BTreeMap<PunctureSet, i64>,
}

/// A chain complex with a distinguished basis. `differential[i]` lists the
/// nonzero coefficients of `d(g_i)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BasedComplex {
    pub degrees: Vec<MultiDegree>,
    pub differential: Vec<Vec<(usize, Rational)>>,
}

impl BasedComplex {
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        self.differential.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |(j, c)| (i, *j, c)))
    }

    pub fn check_indices(&self) -> Result<(), AlgError> {
        for (i, j, _) in self.entries() {
            if j >= self.len() {
                return Err(AlgError::Index(j));
            }
            if self.degrees[j].h != self.degrees[i].h + 1 {
                return Err(AlgError::HomologicalDegree { from: i, to: j });
            }
        }
        Ok(())
    }

    /// Sum over `d∘d`; empty when the complex is valid.
    pub fn d_squared(&self) -> Vec<(usize, usize, Rational)> {
        let mut out = Vec::new();
        for (i, row) in self.differential.iter().enumerate() {
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for (j, c) in row {
                for (k, c2) in &self.differential[*j] {
                    *acc.entry(*k).or_insert_with(Rational::zero) += c * c2;
                }
            }
            out.extend(acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (i, k, c)));
        }
        out
    }

    /// Keeps only entries whose endpoints have equal `grade`. Every entry must
    /// weakly decrease the grade coordinatewise.
    pub fn associated_graded(&self, grade: impl Fn(&MultiDegree) -> Vec<i64>) -> Result<BasedComplex, AlgError> {
        self.associated_graded_by(grade, |t, s| t.len() == s.len() && t.iter().zip(s).all(|(a, b)| a <= b))
    }

    /// Keeps only entries whose endpoints have equal `grade`; every other
    /// entry must satisfy `below(target_grade, source_grade)`.
    pub fn associated_graded_by<G: PartialEq>(
        &self,
        grade: impl Fn(&MultiDegree) -> G,
        below: impl Fn(&G, &G) -> bool,
    ) -> Result<BasedComplex, AlgError> {
        let grades: Vec<G> = self.degrees.iter().map(&grade).collect();
        let mut differential = Vec::with_capacity(self.len());
        for (i, row) in self.differential.iter().enumerate() {
            let mut kept = Vec::new();
            for (j, c) in row {
                if grades[i] == grades[*j] {
                    kept.push((*j, c.clone()));
                } else if !below(&grades[*j], &grades[i]) {
                    return Err(AlgError::GradeIncreasing { from: i, to: *j });
                }
            }
            differential.push(kept);
        }
        Ok(BasedComplex { degrees: self.degrees.clone(), differential })
    }

    /// Ranks of homology per `(h, key(g))`, omitting zeros. The differential
    /// must preserve the key.
    pub fn homology_ranks<K: Ord + Clone + std::hash::Hash>(
        &self,
        key: impl Fn(&MultiDegree) -> K,
    ) -> Result<BTreeMap<(i64, K), usize>, AlgError> {
        self.check_indices()?;
        let keys: Vec<(i64, K)> = self.degrees.iter().map(|g| (g.h, key(g))).collect();
        let mut blocks: BTreeMap<(i64, K), Vec<usize>> = BTreeMap::new();
        for (i, k) in keys.iter().enumerate() {
            blocks.entry(k.clone()).or_default().push(i);
        }
        let mut local: HashMap<usize, usize> = HashMap::new();
        for members in blocks.values() {
            for (pos, &g) in members.iter().enumerate() {
                local.insert(g, pos);
            }
        }
        for (i, j, _) in self.entries() {
            if keys[i].1 != keys[j].1 {
                return Err(AlgError::KeyNotPreserved { from: i, to: j });
            }
        }
        // rank of d leaving each block
        let mut out_rank: HashMap<(i64, K), usize> = HashMap::new();
        for (k, members) in &blocks {
            let cols: Vec<SparseVec> = members
                .iter()
                .map(|&g| self.differential[g].iter().map(|(j, c)| (local[j], c.clone())).collect())
                .collect();
            out_rank.insert(k.clone(), span_rank(&cols));
        }
        let mut ranks = BTreeMap::new();
        for (k, members) in &blocks {
            let rin = out_rank.get(&(k.0 - 1, k.1.clone())).copied().unwrap_or(0);
            let r = members.len() - out_rank[k] - rin;
            if r > 0 {
                ranks.insert(k.clone(), r);
            }
        }
        Ok(ranks)
    }
}
