//! Sparse exact row reduction.
//!
//! Vectors are `BTreeMap<usize, Rational>` keyed by column index. The
//! *leading* column of a vector is its smallest key, so callers control
//! pivot preference purely through how they number columns. Every row kept
//! in an [`Echelon`] is normalized to leading coefficient one, and no two
//! rows share a leading column.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::rational::Rational;

pub type SparseVec = BTreeMap<usize, Rational>;

/// `acc += c * v`, dropping cancelled entries.
pub fn axpy(acc: &mut SparseVec, c: &Rational, v: &SparseVec) {
    if c.is_zero() {
        return;
    }
    for (k, x) in v {
        let prod = c * x;
        match acc.get_mut(k) {
            Some(y) => {
                *y += prod;
                if y.is_zero() {
                    acc.remove(k);
                }
            }
            None => {
                acc.insert(*k, prod);
            }
        }
    }
}

pub fn add_entry(acc: &mut SparseVec, k: usize, c: Rational) {
    if c.is_zero() {
        return;
    }
    match acc.get_mut(&k) {
        Some(y) => {
            *y += c;
            if y.is_zero() {
                acc.remove(&k);
            }
        }
        None => {
            acc.insert(k, c);
        }
    }
}

pub fn scale(v: &SparseVec, c: &Rational) -> SparseVec {
    if c.is_zero() {
        return SparseVec::new();
    }
    v.iter().map(|(k, x)| (*k, x * c)).collect()
}

/// Outcome of [`Echelon::insert`].
#[derive(Debug, Clone)]
pub enum Insertion {
    /// The vector was independent; it now owns this pivot column.
    Pivot(usize),
    /// The vector reduced to zero. Carries the tag combination that
    /// witnesses the dependency (empty when tags are not tracked).
    Dependent(SparseVec),
}

/// Incrementally built row echelon form with optional tag tracking.
///
/// When tracking is on, each row carries a tag vector expressing it as a
/// combination of the tags supplied at insertion time.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    rows: Vec<SparseVec>,
    tags: Vec<SparseVec>,
    pivots: BTreeMap<usize, usize>,
    track: bool,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tracking() -> Self {
        Echelon {
            track: true,
            ..Self::default()
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn row_tag(&self, i: usize) -> &SparseVec {
        &self.tags[i]
    }

    /// Row index owning the pivot column `col`.
    pub fn row_of_pivot(&self, col: usize) -> Option<usize> {
        self.pivots.get(&col).copied()
    }

    /// Fully reduces `v` against every pivot column. Returns the residue and
    /// the coefficients `c_r` with `v = residue + Σ c_r row_r`.
    pub fn reduce(&self, v: &SparseVec) -> (SparseVec, SparseVec) {
        let mut v = v.clone();
        let mut coeffs = SparseVec::new();
        let mut cursor = 0usize;
        loop {
            let next = v
                .range(cursor..)
                .find(|(k, _)| self.pivots.contains_key(k))
                .map(|(k, c)| (*k, c.clone()));
            let Some((col, c)) = next else { break };
            let r = self.pivots[&col];
            axpy(&mut v, &-c.clone(), &self.rows[r]);
            add_entry(&mut coeffs, r, c);
            cursor = col + 1;
        }
        (v, coeffs)
    }

    /// Residue of `v` modulo the row space.
    pub fn normal_form(&self, v: &SparseVec) -> SparseVec {
        self.reduce(v).0
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.normal_form(v).is_empty()
    }

    /// Inserts `v` carrying `tag`. Tags are ignored unless tracking.
    pub fn insert(&mut self, v: SparseVec, tag: SparseVec) -> Insertion {
        let (res, coeffs) = self.reduce(&v);
        let mut tag = if self.track { tag } else { SparseVec::new() };
        if self.track {
            for (r, c) in &coeffs {
                axpy(&mut tag, &-c.clone(), &self.tags[*r]);
            }
        }
        match res.iter().next().map(|(k, c)| (*k, c.clone())) {
            None => Insertion::Dependent(tag),
            Some((lead, c)) => {
                let inv = Rational::one() / c;
                let row = scale(&res, &inv);
                if self.track {
                    tag = scale(&tag, &inv);
                }
                self.pivots.insert(lead, self.rows.len());
                self.rows.push(row);
                self.tags.push(tag);
                Insertion::Pivot(lead)
            }
        }
    }

    /// Expresses `v` through the row tags when `v` lies in the row space.
    pub fn solve(&self, v: &SparseVec) -> Option<SparseVec> {
        let (res, coeffs) = self.reduce(v);
        if !res.is_empty() {
            return None;
        }
        let mut out = SparseVec::new();
        for (r, c) in &coeffs {
            axpy(&mut out, c, &self.tags[*r]);
        }
        Some(out)
    }
}

/// Rank and a kernel basis of the linear map whose columns are `images`
/// (image `j` is the value on source basis vector `j`).
pub fn rank_kernel(images: &[SparseVec]) -> (usize, Vec<SparseVec>) {
    let mut ech = Echelon::tracking();
    let mut kernel = Vec::new();
    for (j, im) in images.iter().enumerate() {
        let tag: SparseVec = [(j, Rational::one())].into_iter().collect();
        if let Insertion::Dependent(k) = ech.insert(im.clone(), tag) {
            kernel.push(k);
        }
    }
    (ech.rank(), kernel)
}

/// Dense Gauss-Jordan rank; used as an independent oracle in tests.
pub fn dense_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let piv = m[rank][col].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = &m[r][col] / &piv;
                for c in col..ncols {
                    let d = &f * &m[rank][c];
                    m[r][c] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}
