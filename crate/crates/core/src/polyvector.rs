//! Polyvector fields `Sym(V∨) ⊗ Λ(V)`, the Schouten bracket, the
//! differential `{W, -}` and its cohomology.
//!
//! A term `g ξ_{j_1}∧..∧ξ_{j_l}` is stored with `j_1 < .. < j_l`
//! (zero-based indices). Polynomial parts are jets; derivatives lower the
//! jet order by one.
//!
//! Text format: terms separated by `,`, each `poly ; wedge` with the wedge
//! written `xi1^xi3` (one-based) or `1`, e.g. `3/2*x^2 ; xi1^xi3, y ; xi2`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactpoly::{self, monomials_up_to, JetPolynomial, Monomial, QuotientPresentation};
use crate::linalg::{self, Echelon, SparseVec};
use crate::rational::{q, Rational};

pub type Wedge = Vec<usize>;

/// Sorts `seq` into a strictly increasing wedge, returning the sign of the
/// permutation, or `None` when an index repeats.
pub fn normalize_wedge(seq: &[usize]) -> Option<(Wedge, i64)> {
    let mut v = seq.to_vec();
    let mut s = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            s = -s;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, s))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyvector {
    nvars: usize,
    order: u32,
    terms: BTreeMap<Wedge, JetPolynomial>,
}

impl Polyvector {
    pub fn zero(nvars: usize, order: u32) -> Self {
        Polyvector {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// The function `f` as an element of `Λ⁰`.
    pub fn function(f: &JetPolynomial) -> Self {
        let mut p = Self::zero(f.nvars(), f.order());
        p.add_term(f, &[]);
        p
    }

    /// `g ξ_{seq}` with `seq` in any order.
    pub fn term(g: &JetPolynomial, seq: &[usize]) -> Self {
        let mut p = Self::zero(g.nvars(), g.order());
        p.add_term(g, seq);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Wedge, &JetPolynomial)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The `Λ^d` component.
    pub fn component(&self, d: usize) -> Polyvector {
        Polyvector {
            nvars: self.nvars,
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == d)
                .map(|(w, g)| (w.clone(), g.clone()))
                .collect(),
        }
    }

    /// Adds `g ξ_{seq}`, truncating `g` at the current order.
    pub fn add_term(&mut self, g: &JetPolynomial, seq: &[usize]) {
        assert!(seq.iter().all(|&j| j < self.nvars), "wedge index out of range");
        let Some((w, s)) = normalize_wedge(seq) else { return };
        let g = g.with_order(self.order.max(g.order())).truncate(self.order).scale(&q(s));
        if g.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(w.clone())
            .or_insert_with(|| JetPolynomial::zero(self.nvars, self.order));
        *slot = &slot.with_order(self.order) + &g.with_order(self.order);
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn truncate(&self, order: u32) -> Self {
        let mut out = Self::zero(self.nvars, order.min(self.order));
        for (w, g) in &self.terms {
            out.add_term(g, w);
        }
        out
    }

    pub fn add(&self, other: &Polyvector) -> Polyvector {
        let mut out = Self::zero(self.nvars, self.order.min(other.order));
        for (w, g) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(g, w);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Polyvector {
        let mut out = Self::zero(self.nvars, self.order);
        for (w, g) in &self.terms {
            out.add_term(&g.scale(c), w);
        }
        out
    }

    pub fn sub(&self, other: &Polyvector) -> Polyvector {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Equality after truncating both sides to the smaller order.
    pub fn agrees_with(&self, other: &Polyvector) -> bool {
        let o = self.order.min(other.order);
        self.truncate(o).sub(&other.truncate(o)).is_zero()
    }

    pub fn render(&self, vars: &[String]) -> String {
        if self.terms.is_empty() {
            return "0 ; 1".to_string();
        }
        self.terms
            .iter()
            .map(|(w, g)| {
                let wedge = if w.is_empty() {
                    "1".to_string()
                } else {
                    w.iter().map(|j| format!("xi{}", j + 1)).collect::<Vec<_>>().join("^")
                };
                format!("{} ; {wedge}", g.render(vars))
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Parses the text format over `vars`. The jet order is the largest
/// polynomial degree present.
pub fn parse_polyvector(text: &str, vars: &[String]) -> Result<Polyvector> {
    let n = vars.len();
    let mut parts = Vec::new();
    let mut offset = 0;
    for chunk in text.split(',') {
        let Some((poly, wedge)) = chunk.split_once(';') else {
            return Err(Error::Syntax {
                pos: offset,
                msg: "expected `poly ; wedge`".into(),
            });
        };
        let g = exactpoly::parse_poly(poly, vars).map_err(|e| match e {
            Error::Syntax { pos, msg } => Error::Syntax { pos: pos + offset, msg },
            other => other,
        })?;
        let wedge_pos = offset + poly.len() + 1;
        let wedge = wedge.trim();
        let mut seq = Vec::new();
        if wedge != "1" {
            for f in wedge.split('^') {
                let f = f.trim();
                let idx = f
                    .strip_prefix("xi")
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&d| d >= 1 && d <= n)
                    .ok_or_else(|| Error::Syntax {
                        pos: wedge_pos,
                        msg: format!("bad wedge factor `{f}`"),
                    })?;
                seq.push(idx - 1);
            }
        }
        parts.push((g, seq));
        offset += chunk.len() + 1;
    }
    let order = parts.iter().map(|(g, _)| g.degree().unwrap_or(0)).max().unwrap_or(0);
    let mut p = Polyvector::zero(n, order);
    for (g, seq) in parts {
        p.add_term(&g.with_order(order), &seq);
    }
    Ok(p)
}

fn remove_at(w: &[usize], k: usize) -> Vec<usize> {
    let mut v = w.to_vec();
    v.remove(k);
    v
}

fn sign(e: usize) -> Rational {
    if e % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Schouten bracket of single terms, straight from the two-sum formula.
fn schouten_terms(f: &JetPolynomial, i: &[usize], g: &JetPolynomial, j: &[usize], out: &mut Polyvector) {
    let (k, l) = (i.len(), j.len());
    for qq in 1..=k {
        let coeff = f * &g.derivative(i[qq - 1]);
        let mut seq = remove_at(i, qq - 1);
        seq.extend_from_slice(j);
        out.add_term(&coeff.scale(&sign(k - qq)), &seq);
    }
    for p in 1..=l {
        let coeff = g * &f.derivative(j[p - 1]);
        let mut seq = remove_at(j, p - 1);
        seq.extend_from_slice(i);
        // l - p - 1 + (k-1)(l-1), shifted by 2 to stay non-negative.
        let e = (l + 1 - p) + (k + 1) * (l + 1);
        out.add_term(&coeff.scale(&sign(e)), &seq);
    }
}

/// `{a, b}_sc`, truncated at `min(order) - 1`.
pub fn schouten(a: &Polyvector, b: &Polyvector) -> Polyvector {
    assert_eq!(a.nvars, b.nvars, "variable counts differ");
    let mut out = Polyvector::zero(a.nvars, a.order.min(b.order).saturating_sub(1));
    for (i, f) in &a.terms {
        for (j, g) in &b.terms {
            schouten_terms(f, i, g, j, &mut out);
        }
    }
    out
}

/// `{W, θ}_sc = Σ_p (-1)^p (g ∂_{j_p} W) ξ_{j_1}..ξ̂_{j_p}..ξ_{j_l}`.
pub fn diff_w(theta: &Polyvector, w: &JetPolynomial) -> Polyvector {
    let mut out = Polyvector::zero(theta.nvars, theta.order.min(w.order()).saturating_sub(1));
    for (j, g) in &theta.terms {
        for p in 1..=j.len() {
            let coeff = g * &w.derivative(j[p - 1]);
            out.add_term(&coeff.scale(&sign(p)), &remove_at(j, p - 1));
        }
    }
    out
}

/// Cohomology of `Λ^d` in the truncated complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaCohomology {
    pub degree: usize,
    /// Dimension in the complex truncated at polynomial degree `N`.
    pub dimension: usize,
    /// Classes supported in polynomial degree at most the threshold.
    pub low_dimension: usize,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PvCohomologyReport {
    pub order: u32,
    /// Classes are counted in polynomial degree `≤ N - deg W + 1`.
    pub threshold: u32,
    pub pieces: Vec<LambdaCohomology>,
    pub higher_vanish: bool,
    pub stable: bool,
    /// Monomial basis of the `Λ⁰` cohomology, ascending graded-lex.
    pub lambda0_basis: Vec<Monomial>,
    pub matches_milnor: bool,
    #[serde(skip)]
    pub milnor: Option<QuotientPresentation>,
}

/// Columns of `Sym_{≤N} ⊗ Λ^d`, highest polynomial degree first.
fn columns(n: usize, order: u32, d: usize) -> Vec<(Monomial, Wedge)> {
    let mut monos = monomials_up_to(n, order);
    monos.reverse();
    let wedges: Vec<Wedge> = subsets(n, d);
    let mut out = Vec::with_capacity(monos.len() * wedges.len());
    for m in &monos {
        for w in &wedges {
            out.push((m.clone(), w.clone()));
        }
    }
    out
}

fn subsets(n: usize, d: usize) -> Vec<Wedge> {
    fn go(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Wedge>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, d, &mut Vec::new(), &mut out);
    out
}

/// Matrix of `{W, -}: Λ^d → Λ^{d-1}` with polynomial degrees `≤ order`.
fn matrix(w: &JetPolynomial, order: u32, d: usize) -> Vec<SparseVec> {
    let n = w.nvars();
    let target = columns(n, order, d - 1);
    let index: std::collections::HashMap<(&Monomial, &Wedge), usize> =
        target.iter().enumerate().map(|(i, (m, wd))| ((m, wd), i)).collect();
    let w = w.with_order(order + 1);
    columns(n, order, d)
        .into_iter()
        .map(|(m, wd)| {
            let theta = Polyvector::term(&JetPolynomial::monomial(m, Rational::one(), order + 1), &wd);
            let img = diff_w(&theta, &w);
            let mut col = SparseVec::new();
            for (wd, g) in img.terms() {
                for (mm, c) in g.terms() {
                    if mm.degree() <= order {
                        linalg::add_entry(&mut col, index[&(mm, wd)], c.clone());
                    }
                }
            }
            col
        })
        .collect()
}

struct Piece {
    dimension: usize,
    low: usize,
    basis0: Vec<Monomial>,
}

fn piece(w: &JetPolynomial, order: u32, threshold: u32, d: usize) -> Piece {
    let n = w.nvars();
    let cols = columns(n, order, d);
    let low = |c: usize| cols[c].0.degree() <= threshold;
    let (kernel_total, low_kernel) = if d == 0 {
        (cols.len(), (0..cols.len()).filter(|&c| low(c)).count())
    } else {
        let (_, kernel) = linalg::rank_kernel(&matrix(w, order, d));
        let mut kern = Echelon::new();
        for v in &kernel {
            kern.insert(v.clone(), SparseVec::new());
        }
        (kernel.len(), kern.pivot_columns().filter(|&c| low(c)).count())
    };
    let mut image = Echelon::new();
    if d < n {
        for v in matrix(w, order, d + 1) {
            image.insert(v, SparseVec::new());
        }
    }
    let low_image = image.pivot_columns().filter(|&c| low(c)).count();
    let basis0 = if d == 0 {
        let mut b: Vec<Monomial> = (0..cols.len())
            .filter(|&c| !image.is_pivot(c))
            .map(|c| cols[c].0.clone())
            .collect();
        b.sort();
        b
    } else {
        Vec::new()
    };
    Piece {
        dimension: kernel_total - image.rank(),
        low: low_kernel - low_image,
        basis0,
    }
}

/// Default truncation: the Milnor starting order plus `deg W - 1`, so that
/// classes are counted up to the Milnor starting order.
pub fn default_pv_order(w: &JetPolynomial) -> u32 {
    exactpoly::default_order(w) + w.degree().unwrap_or(1).saturating_sub(1)
}

/// Cohomology of `(Sym(V∨) ⊗ Λ(V), {W, -})` truncated at polynomial degree
/// `order`, per `Λ`-degree, with a stability probe against `order - 1`.
pub fn pv_cohomology(w: &JetPolynomial, order: u32) -> Result<PvCohomologyReport> {
    if !w.constant_term().is_zero() {
        return Err(Error::Precondition("potential has a nonzero constant term".into()));
    }
    let n = w.nvars();
    let deg = w.degree().unwrap_or(1);
    if order < deg + 1 {
        return Err(Error::Precondition(format!("order {order} is below deg W + 1")));
    }
    let threshold = order + 1 - deg;
    let run = |ord: u32, thr: u32| -> Vec<Piece> {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..=n).map(|d| s.spawn(move || piece(w, ord, thr, d))).collect();
            handles.into_iter().map(|h| h.join().expect("worker")).collect()
        })
    };
    let here = run(order, threshold);
    let prev = run(order - 1, threshold - 1);
    let pieces: Vec<LambdaCohomology> = here
        .iter()
        .zip(&prev)
        .enumerate()
        .map(|(d, (h, p))| LambdaCohomology {
            degree: d,
            dimension: h.dimension,
            low_dimension: h.low,
            stable: h.low == p.low,
        })
        .collect();
    let higher_vanish = pieces.iter().skip(1).all(|p| p.low_dimension == 0);
    let stable = pieces.iter().all(|p| p.stable);
    let lambda0_basis: Vec<Monomial> = here[0]
        .basis0
        .iter()
        .filter(|m| m.degree() <= threshold)
        .cloned()
        .collect();
    let milnor = exactpoly::milnor_algebra(w, None, exactpoly::DEFAULT_ORDER_CAP).ok();
    let matches_milnor = milnor.as_ref().is_some_and(|m| m.basis() == lambda0_basis.as_slice());
    Ok(PvCohomologyReport {
        order,
        threshold,
        pieces,
        higher_vanish,
        stable,
        lambda0_basis,
        matches_milnor,
        milnor,
    })
}

/// Residue of `W` in its Milnor algebra; zero exactly for quasi-homogeneous
/// `W`.
#[derive(Debug, Clone)]
pub struct WClass {
    pub residue: JetPolynomial,
    pub is_zero: bool,
    pub order: u32,
}

pub fn class_of_w(w: &JetPolynomial) -> Result<WClass> {
    let m = exactpoly::milnor_algebra(w, None, exactpoly::DEFAULT_ORDER_CAP)?;
    let residue = exactpoly::normal_form(w, &m)?;
    Ok(WClass {
        is_zero: residue.is_zero(),
        residue,
        order: m.order(),
    })
}

/// Polynomial differential form `Σ g dx_{i_1}∧..∧dx_{i_k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialForm {
    pub nvars: usize,
    pub order: u32,
    pub terms: BTreeMap<Wedge, JetPolynomial>,
}

impl DifferentialForm {
    fn from_polyvector_shape(p: Polyvector) -> Self {
        DifferentialForm {
            nvars: p.nvars,
            order: p.order,
            terms: p.terms,
        }
    }

    fn as_polyvector(&self) -> Polyvector {
        Polyvector {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.clone(),
        }
    }

    /// `dW ∧ α`.
    pub fn dw_wedge(&self, w: &JetPolynomial) -> DifferentialForm {
        let mut out = Polyvector::zero(self.nvars, self.order.min(w.order()).saturating_sub(1));
        for (i, g) in &self.terms {
            for k in 0..self.nvars {
                let mut seq = vec![k];
                seq.extend_from_slice(i);
                out.add_term(&(g * &w.derivative(k)), &seq);
            }
        }
        Self::from_polyvector_shape(out)
    }

    pub fn agrees_with(&self, other: &DifferentialForm) -> bool {
        self.as_polyvector().agrees_with(&other.as_polyvector())
    }

    pub fn scale(&self, c: &Rational) -> DifferentialForm {
        Self::from_polyvector_shape(self.as_polyvector().scale(c))
    }
}

/// Contracts `θ` into `dx_1∧..∧dx_n`: `g ξ_{j_1}∧..∧ξ_{j_l}` goes to
/// `g ι_{ξ_{j_1}} .. ι_{ξ_{j_l}} (dx_1∧..∧dx_n)`, so `1 ↦ dx_1∧..∧dx_n`.
/// With this order `{W, -}` corresponds to `-dW∧` in every degree.
pub fn to_de_rham(theta: &Polyvector) -> DifferentialForm {
    let n = theta.nvars;
    let mut out = Polyvector::zero(n, theta.order);
    for (j, g) in &theta.terms {
        let mut form: Vec<usize> = (0..n).collect();
        let mut s = 0usize;
        for &idx in j.iter().rev() {
            let pos = form.iter().position(|&x| x == idx).expect("distinct indices");
            s += pos;
            form.remove(pos);
        }
        out.add_term(&g.scale(&sign(s)), &form);
    }
    DifferentialForm::from_polyvector_shape(out)
}

/// Global sign `ε` with `to_de_rham({W, θ}) = ε dW ∧ to_de_rham(θ)`.
pub const DE_RHAM_SIGN: i64 = -1;
