//! Matrix factorizations, their Hom complexes over a jet ring, and the
//! homotopy transfer of the endomorphism dg-algebra to its minimal model.
//!
//! Everything is computed over `R_N = k[x]/m^{N+1}`. A factorization is
//! stored as `E = E0 ⊕ E1` with `δ = [[0, δ1], [δ0, 0]]`; rows `0..rank0`
//! of the full matrix are even.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::ainfty::{check_ainfty, AInftyAlgebra};
use crate::error::{Error, Result};
use crate::exactpoly::{
    is_quasi_homogeneous, milnor_algebra, monomials_up_to, parse_poly, JetPolynomial, Monomial,
    DEFAULT_ORDER_CAP,
};
use crate::hochschild::{algebra_from_structure, solve_coboundary, Cochain, TruncatedComplex};
use crate::linalg::{add_entry, axpy, scale, Echelon, Insertion, SparseVec};
use crate::rational::{q, Rational};
use crate::superlin::{Parity, SuperSpace};

pub type PolyMatrix = Vec<Vec<JetPolynomial>>;

fn poly_matmul(a: &PolyMatrix, b: &PolyMatrix, nvars: usize, order: u32) -> PolyMatrix {
    let rows = a.len();
    let cols = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![JetPolynomial::zero(nvars, order); cols]; rows];
    for (i, row) in a.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..cols {
                let t = x * &b[k][j];
                out[i][j] = &out[i][j] + &t;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixFactorization {
    vars: Vec<String>,
    order: u32,
    potential: JetPolynomial,
    rank0: usize,
    rank1: usize,
    /// `E1 -> E0`, `rank0 x rank1`.
    delta1: PolyMatrix,
    /// `E0 -> E1`, `rank1 x rank0`.
    delta0: PolyMatrix,
}

impl MatrixFactorization {
    /// Builds and verifies `δ0 δ1 = W` and `δ1 δ0 = W` at jet order `order`.
    pub fn new(
        vars: Vec<String>,
        potential: &JetPolynomial,
        delta1: PolyMatrix,
        delta0: PolyMatrix,
        order: u32,
    ) -> Result<Self> {
        let n = vars.len();
        let rank0 = delta1.len();
        let rank1 = delta0.len();
        if rank0 == 0 || rank1 == 0 {
            return Err(Error::Precondition("ranks must be positive".into()));
        }
        let shape_ok = delta1.iter().all(|r| r.len() == rank1) && delta0.iter().all(|r| r.len() == rank0);
        if !shape_ok {
            return Err(Error::Precondition("delta shapes do not match".into()));
        }
        if potential.nvars() != n || delta1.iter().chain(&delta0).flatten().any(|p| p.nvars() != n) {
            return Err(Error::Precondition("variable count mismatch".into()));
        }
        let fix = |m: PolyMatrix| -> PolyMatrix {
            m.into_iter()
                .map(|r| r.into_iter().map(|p| p.with_order(order)).collect())
                .collect()
        };
        let mf = MatrixFactorization {
            vars,
            order,
            potential: potential.with_order(order),
            rank0,
            rank1,
            delta1: fix(delta1),
            delta0: fix(delta0),
        };
        mf.verify()?;
        Ok(mf)
    }

    fn verify(&self) -> Result<()> {
        let n = self.vars.len();
        for (name, prod, r) in [
            ("delta1*delta0", poly_matmul(&self.delta1, &self.delta0, n, self.order), self.rank0),
            ("delta0*delta1", poly_matmul(&self.delta0, &self.delta1, n, self.order), self.rank1),
        ] {
            for (i, row) in prod.iter().enumerate().take(r) {
                for (j, p) in row.iter().enumerate() {
                    let want = if i == j {
                        self.potential.clone()
                    } else {
                        JetPolynomial::zero(n, self.order)
                    };
                    if !(p - &want).is_zero() {
                        return Err(Error::Invariant(format!(
                            "{name} differs from W*Id at entry ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn potential(&self) -> &JetPolynomial {
        &self.potential
    }

    pub fn rank0(&self) -> usize {
        self.rank0
    }

    pub fn rank1(&self) -> usize {
        self.rank1
    }

    pub fn rank(&self) -> usize {
        self.rank0 + self.rank1
    }

    pub fn delta1(&self) -> &PolyMatrix {
        &self.delta1
    }

    pub fn delta0(&self) -> &PolyMatrix {
        &self.delta0
    }

    pub fn parity(&self, r: usize) -> Parity {
        (r >= self.rank0) as Parity
    }

    /// Entry `(r, c)` of the full odd matrix `δ` on `E0 ⊕ E1`.
    pub fn delta_entry(&self, r: usize, c: usize) -> Option<&JetPolynomial> {
        match (r < self.rank0, c < self.rank0) {
            (true, false) => Some(&self.delta1[r][c - self.rank0]),
            (false, true) => Some(&self.delta0[r - self.rank0][c]),
            _ => None,
        }
    }

    /// The same factorization at a smaller or larger jet order.
    pub fn at_order(&self, order: u32) -> Result<Self> {
        Self::new(
            self.vars.clone(),
            &self.potential,
            self.delta1.clone(),
            self.delta0.clone(),
            order,
        )
    }

    pub fn render(&self) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
        let r = |m: &PolyMatrix| {
            m.iter()
                .map(|row| row.iter().map(|p| p.render(&self.vars)).collect())
                .collect()
        };
        (r(&self.delta1), r(&self.delta0))
    }
}

/// Exterior monomials `dx_S` ordered by size, then lexicographically.
fn subsets_by_size(n: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

/// The Koszul factorization `δ = ι_η + ω∧` with `ω = Σ_i dW_i / i`.
pub fn koszul_mf(w: &JetPolynomial, vars: &[String], order: u32) -> Result<MatrixFactorization> {
    let n = vars.len();
    if w.nvars() != n {
        return Err(Error::Precondition("variable count mismatch".into()));
    }
    if w.low_degree().is_some_and(|d| d < 2) {
        return Err(Error::Precondition(
            "the potential must lie in the square of the maximal ideal".into(),
        ));
    }
    let top = w.degree().unwrap_or(0);
    let mut omega = vec![JetPolynomial::zero(n, order); n];
    for i in 2..=top {
        let wi = w.homogeneous_part(i);
        if wi.is_zero() {
            continue;
        }
        let c = q(1) / q(i as i64);
        for (k, o) in omega.iter_mut().enumerate() {
            *o = &*o + &wi.derivative(k).with_order(order).scale(&c);
        }
    }
    let subsets = subsets_by_size(n);
    let even: Vec<&Vec<usize>> = subsets.iter().filter(|s| s.len() % 2 == 0).collect();
    let odd: Vec<&Vec<usize>> = subsets.iter().filter(|s| s.len() % 2 == 1).collect();
    let pos = |list: &[&Vec<usize>], s: &[usize]| list.iter().position(|t| t.as_slice() == s);
    // column `s` of δ restricted to one parity, written into the other.
    let column = |s: &[usize], targets: &[&Vec<usize>]| -> Vec<JetPolynomial> {
        let mut col = vec![JetPolynomial::zero(n, order); targets.len()];
        for (p, &k) in s.iter().enumerate() {
            let rest: Vec<usize> = s.iter().copied().filter(|&j| j != k).collect();
            let sign = if p % 2 == 0 { q(1) } else { q(-1) };
            let t = pos(targets, &rest).expect("subset present");
            col[t] = &col[t] + &JetPolynomial::var(n, k, order).scale(&sign);
        }
        for k in (0..n).filter(|k| !s.contains(k)) {
            let before = s.iter().filter(|&&j| j < k).count();
            let sign = if before % 2 == 0 { q(1) } else { q(-1) };
            let mut grown = s.to_vec();
            grown.push(k);
            grown.sort();
            let t = pos(targets, &grown).expect("subset present");
            col[t] = &col[t] + &omega[k].scale(&sign);
        }
        col
    };
    let transpose = |cols: Vec<Vec<JetPolynomial>>, rows: usize| -> PolyMatrix {
        (0..rows)
            .map(|r| cols.iter().map(|c| c[r].clone()).collect())
            .collect()
    };
    let d0_cols: Vec<_> = even.iter().map(|s| column(s, &odd)).collect();
    let d1_cols: Vec<_> = odd.iter().map(|s| column(s, &even)).collect();
    let delta0 = transpose(d0_cols, odd.len());
    let delta1 = transpose(d1_cols, even.len());
    MatrixFactorization::new(vars.to_vec(), w, delta1, delta0, order)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MfFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    vars: Vec<String>,
    potential: String,
    delta1: Vec<Vec<String>>,
    delta0: Vec<Vec<String>>,
}

pub fn load_mf_str(text: &str, order: u32) -> Result<MatrixFactorization> {
    let file: MfFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let parse = |s: &String| parse_poly(s, &file.vars).map(|p| p.with_order(order));
    let matrix = |m: &Vec<Vec<String>>| -> Result<PolyMatrix> {
        m.iter().map(|r| r.iter().map(parse).collect()).collect()
    };
    let w = parse(&file.potential)?;
    MatrixFactorization::new(
        file.vars.clone(),
        &w,
        matrix(&file.delta1)?,
        matrix(&file.delta0)?,
        order,
    )
}

pub fn load_mf(path: &Path, order: u32) -> Result<MatrixFactorization> {
    load_mf_str(&std::fs::read_to_string(path)?, order)
}

pub fn save_mf_string(mf: &MatrixFactorization, note: Option<&str>) -> String {
    let (delta1, delta0) = mf.render();
    let file = MfFile {
        note: note.map(str::to_string),
        vars: mf.vars.clone(),
        potential: mf.potential.render(&mf.vars),
        delta1,
        delta0,
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

/// `Hom_{R_N}(E, F)` as a finite-dimensional super vector space.
///
/// Basis vectors are `(monomial, row, col)` with row in `F`, col in `E`.
/// Monomials are numbered by descending degree so that a row echelon form
/// prefers high-degree leading columns; low-degree representatives then
/// fall out of the trailing rows.
#[derive(Debug, Clone)]
pub struct HomComplex {
    source: MatrixFactorization,
    target: MatrixFactorization,
    order: u32,
    monos: Vec<Monomial>,
    mono_index: HashMap<Monomial, usize>,
    /// `mono_mul[a][b]`, `None` above the jet order.
    mono_mul: Vec<Vec<Option<usize>>>,
}

impl HomComplex {
    pub fn new(source: &MatrixFactorization, target: &MatrixFactorization) -> Result<Self> {
        if source.nvars() != target.nvars() {
            return Err(Error::Precondition("variable count mismatch".into()));
        }
        let order = source.order().min(target.order());
        if source.potential().truncate(order) != target.potential().truncate(order) {
            return Err(Error::PotentialMismatch);
        }
        let source = source.at_order(order)?;
        let target = target.at_order(order)?;
        let mut monos = monomials_up_to(source.nvars(), order);
        monos.reverse();
        let mono_index: HashMap<Monomial, usize> =
            monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mono_mul = monos
            .iter()
            .map(|a| monos.iter().map(|b| mono_index.get(&a.mul(b)).copied()).collect())
            .collect();
        Ok(HomComplex {
            source,
            target,
            order,
            monos,
            mono_index,
            mono_mul,
        })
    }

    pub fn source(&self) -> &MatrixFactorization {
        &self.source
    }

    pub fn target(&self) -> &MatrixFactorization {
        &self.target
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.monos.len() * self.target.rank() * self.source.rank()
    }

    pub fn index(&self, mono: usize, row: usize, col: usize) -> usize {
        (mono * self.target.rank() + row) * self.source.rank() + col
    }

    /// `(monomial, row, col)` of a basis index.
    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let cols = self.source.rank();
        let rows = self.target.rank();
        (idx / (rows * cols), idx / cols % rows, idx % cols)
    }

    pub fn parity(&self, idx: usize) -> Parity {
        let (_, r, c) = self.split(idx);
        self.target.parity(r) ^ self.source.parity(c)
    }

    pub fn monomial_degree(&self, idx: usize) -> u32 {
        self.monos[self.split(idx).0].degree()
    }

    pub fn monomial(&self, idx: usize) -> &Monomial {
        &self.monos[self.split(idx).0]
    }

    /// Parity of a vector, `None` when it mixes parities.
    pub fn vector_parity(&self, v: &SparseVec) -> Option<Parity> {
        let mut ps = v.keys().map(|&k| self.parity(k));
        let first = ps.next().unwrap_or(0);
        ps.all(|p| p == first).then_some(first)
    }

    /// A matrix of jets, `target.rank() x source.rank()`, as a vector.
    pub fn from_matrix(&self, m: &PolyMatrix) -> SparseVec {
        let mut v = SparseVec::new();
        for (r, row) in m.iter().enumerate() {
            for (c, p) in row.iter().enumerate() {
                for (mono, x) in p.terms() {
                    if let Some(&mi) = self.mono_index.get(mono) {
                        add_entry(&mut v, self.index(mi, r, c), x.clone());
                    }
                }
            }
        }
        v
    }

    pub fn to_matrix(&self, v: &SparseVec) -> PolyMatrix {
        let n = self.source.nvars();
        let mut m =
            vec![vec![JetPolynomial::zero(n, self.order); self.source.rank()]; self.target.rank()];
        for (&k, x) in v {
            let (mi, r, c) = self.split(k);
            m[r][c].add_term(self.monos[mi].clone(), x.clone());
        }
        m
    }

    /// The identity, when source and target have the same ranks.
    pub fn identity(&self) -> SparseVec {
        let one = self.mono_index[&Monomial::one(self.source.nvars())];
        (0..self.source.rank().min(self.target.rank()))
            .map(|r| (self.index(one, r, r), Rational::one()))
            .collect()
    }

    fn delta_terms(mf: &MatrixFactorization, mono_index: &HashMap<Monomial, usize>) -> Vec<Vec<(usize, Rational)>> {
        let r = mf.rank();
        let mut out = vec![Vec::new(); r * r];
        for i in 0..r {
            for j in 0..r {
                if let Some(p) = mf.delta_entry(i, j) {
                    out[i * r + j] = p
                        .terms()
                        .iter()
                        .filter_map(|(m, c)| mono_index.get(m).map(|&k| (k, c.clone())))
                        .collect();
                }
            }
        }
        out
    }

    /// `d f = δ_F f − (−1)^{|f|} f δ_E`, on a parity-homogeneous or mixed
    /// vector (each basis term carries its own parity).
    pub fn differential(&self, f: &SparseVec) -> SparseVec {
        let rt = self.target.rank();
        let rs = self.source.rank();
        let dt = Self::delta_terms(&self.target, &self.mono_index);
        let ds = Self::delta_terms(&self.source, &self.mono_index);
        let mut out = SparseVec::new();
        for (&k, x) in f {
            let (mi, r, c) = self.split(k);
            // δ_F f: entry (i, c) += δ_F[i][r] * f[r][c]
            for i in 0..rt {
                for (dm, dc) in &dt[i * rt + r] {
                    if let Some(m) = self.mono_mul[*dm][mi] {
                        add_entry(&mut out, self.index(m, i, c), dc * x);
                    }
                }
            }
            let sign = if self.parity(k) == 0 { -x.clone() } else { x.clone() };
            // f δ_E: entry (r, j) += f[r][c] * δ_E[c][j]
            for j in 0..rs {
                for (dm, dc) in &ds[c * rs + j] {
                    if let Some(m) = self.mono_mul[mi][*dm] {
                        add_entry(&mut out, self.index(m, r, j), dc * &sign);
                    }
                }
            }
        }
        out
    }

    /// Images of every basis vector under `d`.
    pub fn differential_columns(&self) -> Vec<SparseVec> {
        (0..self.dim())
            .map(|k| self.differential(&[(k, Rational::one())].into()))
            .collect()
    }
}

/// Composition `g ∘ f` for `f ∈ Hom(E, F)` and `g ∈ Hom(F, G)`.
pub fn compose(outer: &HomComplex, inner: &HomComplex, g: &SparseVec, f: &SparseVec) -> Result<SparseVec> {
    if outer.source.rank() != inner.target.rank() || outer.order != inner.order {
        return Err(Error::Precondition("composition shapes do not match".into()));
    }
    let into = HomComplex {
        source: inner.source.clone(),
        target: outer.target.clone(),
        order: outer.order,
        monos: outer.monos.clone(),
        mono_index: outer.mono_index.clone(),
        mono_mul: outer.mono_mul.clone(),
    };
    Ok(product(&into, outer, inner, g, f))
}

fn product(into: &HomComplex, outer: &HomComplex, inner: &HomComplex, g: &SparseVec, f: &SparseVec) -> SparseVec {
    // bucket f by its row so each g entry meets only matching terms
    let mut by_row: BTreeMap<usize, Vec<(usize, usize, &Rational)>> = BTreeMap::new();
    for (&k, x) in f {
        let (mi, r, c) = inner.split(k);
        by_row.entry(r).or_default().push((mi, c, x));
    }
    let mut out = SparseVec::new();
    for (&k, y) in g {
        let (gm, r, c) = outer.split(k);
        if let Some(terms) = by_row.get(&c) {
            for &(fm, j, x) in terms {
                if let Some(m) = outer.mono_mul[gm][fm] {
                    add_entry(&mut out, into.index(m, r, j), y * x);
                }
            }
        }
    }
    out
}

/// `End_{R_N}(E)` with composition.
#[derive(Debug, Clone)]
pub struct EndDga {
    hom: HomComplex,
    dcols: Vec<SparseVec>,
}

pub fn endo_dga(mf: &MatrixFactorization) -> Result<EndDga> {
    let hom = HomComplex::new(mf, mf)?;
    let dcols = hom.differential_columns();
    Ok(EndDga { hom, dcols })
}

impl EndDga {
    pub fn hom(&self) -> &HomComplex {
        &self.hom
    }

    pub fn dim(&self) -> usize {
        self.hom.dim()
    }

    pub fn order(&self) -> u32 {
        self.hom.order
    }

    pub fn unit(&self) -> SparseVec {
        self.hom.identity()
    }

    pub fn d(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (k, x) in v {
            axpy(&mut out, x, &self.dcols[*k]);
        }
        out
    }

    /// The composition `a ∘ b`.
    pub fn mul(&self, a: &SparseVec, b: &SparseVec) -> SparseVec {
        product(&self.hom, &self.hom, &self.hom, a, b)
    }

    pub fn parity(&self, v: &SparseVec) -> Option<Parity> {
        self.hom.vector_parity(v)
    }

    /// Splits the dga as cohomology ⊕ coboundaries ⊕ a complement, with
    /// cohomology representatives of monomial degree at most `threshold`
    /// listed first ("good" classes) and the rest after.
    pub fn splitting(&self, threshold: u32) -> Splitting {
        let mut image = Echelon::tracking();
        let mut kernel = Vec::new();
        for (j, im) in self.dcols.iter().enumerate() {
            let tag: SparseVec = [(j, Rational::one())].into();
            if let Insertion::Dependent(k) = image.insert(im.clone(), tag) {
                kernel.push(k);
            }
        }
        let mut cycles = Echelon::new();
        for k in kernel {
            cycles.insert(k, SparseVec::new());
        }
        let low = |row: &SparseVec| {
            row.keys()
                .next()
                .is_some_and(|&k| self.hom.monomial_degree(k) <= threshold)
        };
        // lowest degree candidates first, the identity ahead of everything
        let mut candidates: Vec<SparseVec> = vec![self.unit()];
        let mut rows: Vec<&SparseVec> = cycles.rows().iter().collect();
        rows.sort_by(|a, b| b.keys().next().cmp(&a.keys().next()));
        candidates.extend(rows.iter().map(|r| (*r).clone()));
        let mut classes = Echelon::tracking();
        for r in image.rows() {
            classes.insert(r.clone(), SparseVec::new());
        }
        let mut reps = Vec::new();
        let mut good = 0;
        for pass_low in [true, false] {
            for c in &candidates {
                if low(c) != pass_low {
                    continue;
                }
                let tag: SparseVec = [(reps.len(), Rational::one())].into();
                if let Insertion::Pivot(_) = classes.insert(c.clone(), tag) {
                    reps.push(c.clone());
                    if pass_low {
                        good += 1;
                    }
                }
            }
        }
        Splitting {
            threshold,
            reps,
            good,
            image,
            classes,
        }
    }
}

/// A splitting `B = i(H) ⊕ dB ⊕ C` with `h = d^{-1}` on `dB`, zero on
/// `i(H) ⊕ C`. The side conditions `h² = 0`, `h i = 0`, `p h = 0` hold
/// by construction.
#[derive(Debug, Clone)]
pub struct Splitting {
    threshold: u32,
    reps: Vec<SparseVec>,
    good: usize,
    image: Echelon,
    classes: Echelon,
}

impl Splitting {
    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn dimension(&self) -> usize {
        self.reps.len()
    }

    pub fn good_dimension(&self) -> usize {
        self.good
    }

    pub fn representatives(&self) -> &[SparseVec] {
        &self.reps
    }

    pub fn include(&self, coords: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, c) in coords {
            axpy(&mut out, c, &self.reps[*i]);
        }
        out
    }

    fn cycle_part(&self, dga: &EndDga, v: &SparseVec) -> (SparseVec, SparseVec) {
        let c = self.image.solve(&dga.d(v)).expect("dv is a coboundary");
        let mut z = v.clone();
        axpy(&mut z, &-Rational::one(), &c);
        (z, c)
    }

    /// Coordinates of `p(v)` in the representative basis.
    pub fn project(&self, dga: &EndDga, v: &SparseVec) -> SparseVec {
        let (z, _) = self.cycle_part(dga, v);
        self.classes.solve(&z).expect("cycles split as classes plus coboundaries")
    }

    pub fn homotopy(&self, dga: &EndDga, v: &SparseVec) -> SparseVec {
        let (mut z, _) = self.cycle_part(dga, v);
        let coords = self.classes.solve(&z).expect("cycles split");
        axpy(&mut z, &-Rational::one(), &self.include(&coords));
        self.image.solve(&z).expect("boundary part lies in the image")
    }
}

/// The transferred A∞ structure on the good cohomology classes.
#[derive(Debug, Clone)]
pub struct MinimalModel {
    pub algebra: AInftyAlgebra,
    pub k_max: usize,
    pub order: u32,
    pub threshold: u32,
    /// Dimension of the full cohomology of the truncated dga.
    pub full_dimension: usize,
    /// Representatives of the classes in `algebra`, as endomorphisms.
    pub representatives: Vec<PolyMatrix>,
}

/// Homotopy transfer along a splitting, written in shifted form:
/// `Λ_n = Σ b₂(L_k, L_l)` over `k + l = n`, `L_1 = i`, `L_k = h Λ_k`, and
/// `b'_n = p Λ_n`. Inputs and outputs are restricted to the good classes;
/// any leakage into the others is a splitting failure.
pub fn transfer(dga: &EndDga, split: &Splitting, k_max: usize) -> Result<MinimalModel> {
    let g = split.good;
    let parities: Vec<Parity> = (0..g)
        .map(|i| dga.parity(&split.reps[i]).expect("homogeneous representative"))
        .collect();
    let mut odd = 0;
    let mut even = 0;
    let names: Vec<(String, Parity)> = parities
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let name = if i == 0 {
                "1".to_string()
            } else if p == 0 {
                even += 1;
                format!("e{even}")
            } else {
                odd += 1;
                format!("o{odd}")
            };
            (name, p)
        })
        .collect();
    let space = SuperSpace::new(names)?;
    let b2 = |u: &SparseVec, v: &SparseVec| -> SparseVec {
        let prod = dga.mul(u, v);
        match dga.parity(u) {
            Some(1) => scale(&prod, &-Rational::one()),
            _ => prod,
        }
    };
    let mut lambda_memo: Vec<HashMap<Vec<usize>, SparseVec>> = vec![HashMap::new(); k_max + 1];
    let mut leaf_memo: Vec<HashMap<Vec<usize>, SparseVec>> = vec![HashMap::new(); k_max + 1];
    for i in 0..g {
        leaf_memo[1].insert(vec![i], split.reps[i].clone());
    }
    let mut b = Cochain::zero(space.clone(), 1);
    for k in 2..=k_max {
        let tuples: Vec<Vec<usize>> = space.tuples(k).collect();
        let computed = parallel_map(&tuples, |t| {
            let mut acc = SparseVec::new();
            for j in 1..k {
                let u = &leaf_memo[j][&t[..j]];
                let v = &leaf_memo[k - j][&t[j..]];
                if u.is_empty() || v.is_empty() {
                    continue;
                }
                axpy(&mut acc, &Rational::one(), &b2(u, v));
            }
            let leaf = if acc.is_empty() || k == k_max {
                SparseVec::new()
            } else {
                split.homotopy(dga, &acc)
            };
            let out = if acc.is_empty() {
                SparseVec::new()
            } else {
                split.project(dga, &acc)
            };
            (acc, leaf, out)
        });
        for (t, (acc, leaf, out)) in tuples.into_iter().zip(computed) {
            if let Some((&cls, _)) = out.iter().find(|(&c, _)| c >= g) {
                let degree = split.reps[cls]
                    .keys()
                    .next()
                    .map_or(0, |&i| dga.hom.monomial_degree(i));
                return Err(Error::Splitting(format!(
                    "arity {k} product leaves the low-degree classes (class of degree {degree}, jet order {}, threshold {})",
                    dga.order(),
                    split.threshold
                )));
            }
            for (o, c) in out {
                b.add_entry(t.clone(), o, c)?;
            }
            lambda_memo[k].insert(t.clone(), acc);
            leaf_memo[k].insert(t, leaf);
        }
    }
    let mut algebra = algebra_from_structure(&b, Some(0))?;
    if algebra.check_unit().is_err() {
        algebra = algebra_from_structure(&b, None)?;
    }
    let relations = check_ainfty(&algebra, k_max);
    if let Some(v) = relations.first_violation {
        return Err(Error::Invariant(format!(
            "transferred products violate the relation of arity {} on ({})",
            v.arity,
            v.inputs.join(",")
        )));
    }
    let representatives = split.reps[..g].iter().map(|r| dga.hom.to_matrix(r)).collect();
    Ok(MinimalModel {
        algebra,
        k_max,
        order: dga.order(),
        threshold: split.threshold,
        full_dimension: split.dimension(),
        representatives,
    })
}

/// Evaluates `f` on each item using scoped threads; results keep input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    if items.len() < 16 || workers == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Largest endomorphism dga the pipeline will build.
pub const DGA_DIM_CAP: usize = 60_000;
/// Largest truncated Hochschild complex `compare_m_w` will solve in.
pub const HOCHSCHILD_BASIS_CAP: usize = 60_000;

/// Largest `K_max <= 6` whose Hochschild window `K_max - 1` fits under
/// [`HOCHSCHILD_BASIS_CAP`] for a model of dimension `2^n`.
pub fn default_compare_arity(nvars: usize) -> usize {
    let dim = 1usize << nvars;
    (3..=6)
        .rev()
        .find(|&k| hochschild_basis(dim, k - 1) <= HOCHSCHILD_BASIS_CAP)
        .unwrap_or(3)
}

/// Hochschild window from which a class-zero answer is taken as decided:
/// `deg W`. Below it the obstruction of a non-quasi-homogeneous `W` may
/// not have surfaced yet.
pub fn sufficient_window(w: &JetPolynomial) -> usize {
    w.degree().unwrap_or(2) as usize
}

/// Largest `K_max <= max(6, deg W + 1)` that fits under
/// [`HOCHSCHILD_BASIS_CAP`].
pub fn compare_arity(w: &JetPolynomial) -> usize {
    let dim = 1usize << w.nvars();
    let top = (sufficient_window(w) + 1).max(6);
    (3..=top)
        .rev()
        .find(|&k| hochschild_basis(dim, k - 1) <= HOCHSCHILD_BASIS_CAP)
        .unwrap_or(3)
}

fn hochschild_basis(dim: usize, window: usize) -> usize {
    let mut basis = 0usize;
    let mut layer = dim;
    for _ in 0..=window {
        basis = basis.saturating_add(layer);
        layer = layer.saturating_mul(dim);
    }
    basis
}

/// `max(2 deg W, n (deg W - 2) + deg W - 1)`, at least 4. The second term
/// keeps a product of `n` odd representatives of degree `deg W - 2` under
/// the good threshold.
pub fn default_mf_order(w: &JetPolynomial) -> u32 {
    let d = w.degree().unwrap_or(2);
    let n = w.nvars() as u32;
    (2 * d).max(n * d.saturating_sub(2) + d - 1).max(4)
}

/// Classes of degree above `N - deg W + 1` are artifacts of the jet
/// truncation; below it they match the untruncated cohomology.
pub fn good_threshold(w: &JetPolynomial, order: u32) -> u32 {
    (order + 1).saturating_sub(w.degree().unwrap_or(2))
}

fn dga_dimension(n: usize, rank: usize, order: u32) -> usize {
    let mut monos: usize = 1;
    for i in 1..=n {
        monos = monos * (order as usize + i) / i;
    }
    monos.saturating_mul(rank * rank)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndoReport {
    pub order: u32,
    pub threshold: u32,
    pub dga_dimension: usize,
    /// Cohomology of the truncated dga, artifacts included.
    pub full_dimension: usize,
    pub dimension: usize,
    pub even: usize,
    pub odd: usize,
    /// Same count one jet order lower.
    pub previous_dimension: usize,
    pub stable: bool,
}

/// Cohomology of `End(E)` at the order of `mf`, with a probe one order lower.
pub fn endo_report(mf: &MatrixFactorization) -> Result<EndoReport> {
    let n = mf.order();
    if n == 0 {
        return Err(Error::Precondition("jet order must be positive".into()));
    }
    if dga_dimension(mf.nvars(), mf.rank(), n) > DGA_DIM_CAP {
        return Err(Error::Precondition(format!(
            "endomorphism dga exceeds {DGA_DIM_CAP} dimensions at jet order {n}"
        )));
    }
    let w = mf.potential();
    let here = endo_dga(mf)?;
    let split = here.splitting(good_threshold(w, n));
    let lower = endo_dga(&mf.at_order(n - 1)?)?;
    let previous = lower.splitting(good_threshold(w, n - 1)).good_dimension();
    let odd = split.reps[..split.good]
        .iter()
        .filter(|r| here.parity(r) == Some(1))
        .count();
    Ok(EndoReport {
        order: n,
        threshold: split.threshold,
        dga_dimension: here.dim(),
        full_dimension: split.dimension(),
        dimension: split.good,
        even: split.good - odd,
        odd,
        previous_dimension: previous,
        stable: previous == split.good,
    })
}

/// Raises the jet order from `start` (default `2 deg W`) until the count of
/// good classes agrees with the order below, or `cap` is reached.
pub fn stable_endo_report(
    w: &JetPolynomial,
    vars: &[String],
    start: Option<u32>,
    cap: u32,
) -> Result<EndoReport> {
    let mut n = start.unwrap_or_else(|| default_mf_order(w));
    loop {
        let report = endo_report(&koszul_mf(&w.with_order(n), vars, n)?)?;
        if report.stable || n >= cap {
            return Ok(report);
        }
        n += 1;
    }
}

/// Koszul factorization, endomorphism dga, splitting and transfer.
pub fn minimal_model(
    w: &JetPolynomial,
    vars: &[String],
    order: Option<u32>,
    k_max: usize,
) -> Result<MinimalModel> {
    let n = order.unwrap_or_else(|| default_mf_order(w));
    let rank = 1usize << vars.len();
    if dga_dimension(vars.len(), rank, n) > DGA_DIM_CAP {
        return Err(Error::Precondition(format!(
            "endomorphism dga exceeds {DGA_DIM_CAP} dimensions at jet order {n}"
        )));
    }
    let mf = koszul_mf(&w.with_order(n), vars, n)?;
    let dga = endo_dga(&mf)?;
    let split = dga.splitting(good_threshold(w, n));
    transfer(&dga, &split, k_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ClassZero,
    ClassNonzero,
    WindowLimited,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeCorrespondence {
    pub degree: u32,
    /// Lowest arity above two with a nonzero product.
    pub first_higher_arity: Option<usize>,
    /// `m_{n+1}(ξ,…,ξ)` as a multiple of the unit.
    pub scalar: Option<String>,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub order: u32,
    pub k_max: usize,
    /// Hochschild arity window; products up to `window + 1` are known.
    pub window: usize,
    pub quasi_homogeneous: bool,
    pub verdict: Verdict,
    pub reason: Option<String>,
    /// A certificate always; a class-zero answer once the window reaches
    /// [`sufficient_window`].
    pub window_suffices: bool,
    /// Whether the verdict equals the quasi-homogeneity verdict, when the
    /// window suffices.
    pub agrees: Option<bool>,
    pub degree_correspondence: Option<DegreeCorrespondence>,
    #[serde(skip)]
    pub witness: Option<Cochain>,
}

/// Decides whether the structure cochain `b` of the minimal model is a
/// coboundary `{b, γ} = b` in the complex truncated at arity `K_max - 1`.
/// Truncation is a quotient, so non-solvability there is a certificate;
/// a solution is an explicit witness up to the window only.
pub fn compare_m_w(w: &JetPolynomial, model: &MinimalModel) -> Result<CompareReport> {
    let milnor = milnor_algebra(w, None, DEFAULT_ORDER_CAP)?;
    let qh = is_quasi_homogeneous(w, &milnor)?.quasi_homogeneous;
    let a = &model.algebra;
    let window = model.k_max.saturating_sub(1);
    let mut report = CompareReport {
        order: model.order,
        k_max: model.k_max,
        window,
        quasi_homogeneous: qh,
        verdict: Verdict::WindowLimited,
        reason: None,
        window_suffices: false,
        agrees: None,
        degree_correspondence: (w.nvars() == 1).then(|| degree_correspondence(w, a)),
        witness: None,
    };
    let basis = hochschild_basis(a.dim(), window);
    if window < 2 {
        report.reason = Some("the window must reach arity 2".into());
        return Ok(report);
    }
    if basis > HOCHSCHILD_BASIS_CAP {
        report.reason = Some(format!(
            "truncated Hochschild complex has {basis} basis cochains, above {HOCHSCHILD_BASIS_CAP}"
        ));
        return Ok(report);
    }
    let cx = TruncatedComplex::new(a, window);
    let target = cx.structure().truncate(window);
    match solve_coboundary(&cx, &target) {
        Some(gamma) => {
            report.verdict = Verdict::ClassZero;
            report.witness = Some(gamma);
        }
        None => report.verdict = Verdict::ClassNonzero,
    }
    report.window_suffices =
        report.verdict == Verdict::ClassNonzero || window >= sufficient_window(w);
    if report.window_suffices {
        report.agrees = Some((report.verdict == Verdict::ClassZero) == qh);
    } else {
        report.reason = Some(format!(
            "no obstruction up to arity {window}; a decision needs arity {}",
            sufficient_window(w)
        ));
    }
    Ok(report)
}

fn degree_correspondence(w: &JetPolynomial, a: &AInftyAlgebra) -> DegreeCorrespondence {
    let degree = w.low_degree().unwrap_or(0);
    let first = a.products().map(|(k, _)| k).find(|&k| k > 2);
    let odd = (0..a.dim()).find(|&i| a.space().parity(i) == 1);
    let unit = a.unit();
    let scalar = match (first, odd, unit) {
        (Some(k), Some(x), Some(u)) => a
            .product(k)
            .and_then(|m| m.get(&vec![x; k]))
            .and_then(|v| (v.len() == 1).then(|| v.get(&u).cloned()).flatten()),
        _ => None,
    };
    let matches = match first {
        Some(k) => k as u32 == degree && scalar.is_some(),
        // the quadratic case lives in m2 itself
        None => degree == 2,
    };
    DegreeCorrespondence {
        degree,
        first_higher_arity: first,
        scalar: scalar.map(|c| crate::rational::format_rational(&c)),
        matches,
    }
}
