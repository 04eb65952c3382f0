//! Local quotient algebras by linear algebra on jets.
//!
//! The ideal `I + m^{N+1}` is spanned by the truncated products `m * g` for
//! monomials `m` and generators `g`. Columns are numbered so that the
//! highest graded-lex monomial comes first; the echelon therefore pivots on
//! high-degree monomials and the complementary (non-pivot) monomials form a
//! low-degree basis of the quotient.
//!
//! A presentation at order `N` is *stable* when no basis monomial has degree
//! `N` (so `m^N ⊂ I` by Nakayama and the jet quotient is the local quotient)
//! and re-running at `N + 1` returns the same basis.

use std::collections::HashMap;

use num_traits::{One, Zero};

use super::monomial::{monomials_up_to, Monomial};
use super::poly::JetPolynomial;
use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseVec};
use crate::rational::Rational;

/// Default ceiling on the jet order when searching for a stable presentation.
pub const DEFAULT_ORDER_CAP: u32 = 24;

#[derive(Debug, Clone)]
pub struct QuotientPresentation {
    nvars: usize,
    order: u32,
    generators: Vec<JetPolynomial>,
    basis: Vec<Monomial>,
    stable: bool,
    columns: Columns,
    echelon: Echelon,
}

#[derive(Debug, Clone)]
struct Columns {
    /// Monomials in descending graded-lex order; the index is the column.
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl Columns {
    fn new(nvars: usize, order: u32) -> Self {
        let mut monos = monomials_up_to(nvars, order);
        monos.reverse();
        let index = monos
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Columns { monos, index }
    }

    fn vector(&self, p: &JetPolynomial) -> SparseVec {
        p.terms()
            .iter()
            .filter_map(|(m, c)| self.index.get(m).map(|&i| (i, c.clone())))
            .collect()
    }

    fn poly(&self, nvars: usize, order: u32, v: &SparseVec) -> JetPolynomial {
        JetPolynomial::from_terms(
            nvars,
            order,
            v.iter().map(|(i, c)| (self.monos[*i].clone(), c.clone())),
        )
    }
}

impl QuotientPresentation {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn generators(&self) -> &[JetPolynomial] {
        &self.generators
    }

    /// Basis monomials in ascending graded-lex order.
    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn is_stable(&self) -> bool {
        self.stable
    }

    /// Dimension of the quotient, `None` when the presentation is unstable.
    pub fn dimension(&self) -> Option<usize> {
        self.stable.then_some(self.basis.len())
    }

    /// Rank of the ideal image inside the jet space of order `N`.
    pub fn ideal_rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn jet_dimension(&self) -> usize {
        self.columns.monos.len()
    }

    /// Number of basis monomials of each degree (the Hilbert function).
    pub fn hilbert_function(&self) -> Vec<usize> {
        let top = self.basis.iter().map(Monomial::degree).max().unwrap_or(0);
        let mut h = vec![0; top as usize + 1];
        for m in &self.basis {
            h[m.degree() as usize] += 1;
        }
        h
    }

    /// Residue of `p` supported on the basis monomials.
    pub fn reduce(&self, p: &JetPolynomial) -> JetPolynomial {
        let v = self.columns.vector(&p.truncate(self.order));
        let r = self.echelon.normal_form(&v);
        self.columns.poly(self.nvars, self.order, &r)
    }
}

/// Row-reduces the span of `{m * g}` in the jet space of order `order`.
pub fn quotient_basis(generators: &[JetPolynomial], order: u32) -> QuotientPresentation {
    let nvars = generators.first().map_or(0, JetPolynomial::nvars);
    let first = reduce_at(nvars, generators, order, false);
    let top_free = first
        .basis
        .iter()
        .all(|m| m.degree() < order);
    let stable = top_free && {
        let probe = reduce_at(nvars, generators, order + 1, false);
        probe.basis == first.basis
    };
    QuotientPresentation { stable, ..first }
}

fn reduce_at(
    nvars: usize,
    generators: &[JetPolynomial],
    order: u32,
    track: bool,
) -> QuotientPresentation {
    let columns = Columns::new(nvars, order);
    let mut echelon = if track {
        Echelon::tracking()
    } else {
        Echelon::new()
    };
    let mut tag_id = 0usize;
    for g in generators {
        let g = g.with_order(order.max(g.order())).truncate(order);
        let Some(low) = g.low_degree() else {
            tag_id += columns.monos.len();
            continue;
        };
        for (mi, m) in columns.monos.iter().enumerate().rev() {
            if m.degree() + low > order {
                continue;
            }
            let row = columns.vector(&g.mul_monomial(m, &Rational::one()));
            let tag: SparseVec = [(tag_id + mi, Rational::one())].into_iter().collect();
            echelon.insert(row, tag);
        }
        tag_id += columns.monos.len();
    }
    let mut basis: Vec<Monomial> = columns
        .monos
        .iter()
        .enumerate()
        .filter(|(i, _)| !echelon.is_pivot(*i))
        .map(|(_, m)| m.clone())
        .collect();
    basis.sort();
    QuotientPresentation {
        nvars,
        order,
        generators: generators.to_vec(),
        basis,
        stable: false,
        columns,
        echelon,
    }
}

/// The partial derivatives of `w`, each of order `N - 1`.
pub fn jacobian_ideal(w: &JetPolynomial) -> Vec<JetPolynomial> {
    (0..w.nvars()).map(|i| w.derivative(i)).collect()
}

fn check_critical(w: &JetPolynomial) -> Result<()> {
    if w.is_zero() {
        return Err(Error::Precondition("potential is zero".into()));
    }
    if !w.constant_term().is_zero() {
        return Err(Error::Precondition("potential has a nonzero constant term".into()));
    }
    if w.low_degree() == Some(1) {
        return Err(Error::Precondition(
            "origin is not a critical point (nonzero linear part)".into(),
        ));
    }
    Ok(())
}

/// `2 * deg W`, the default starting jet order.
pub fn default_order(w: &JetPolynomial) -> u32 {
    (2 * w.degree().unwrap_or(1)).max(2)
}

fn stabilize(
    w: &JetPolynomial,
    order: Option<u32>,
    cap: u32,
    gens: impl Fn(&JetPolynomial) -> Vec<JetPolynomial>,
) -> Result<QuotientPresentation> {
    check_critical(w)?;
    let start = order.unwrap_or_else(|| default_order(w));
    let mut n = start;
    loop {
        let p = quotient_basis(&gens(w), n);
        if p.is_stable() {
            return Ok(p);
        }
        if n >= cap.max(start) {
            return Err(Error::Unstable(n));
        }
        n += 1;
    }
}

/// `C[[x]] / J_W`. Starts at `order` (default `2 deg W`) and raises the jet
/// order until the presentation is stable or `cap` is reached.
pub fn milnor_algebra(
    w: &JetPolynomial,
    order: Option<u32>,
    cap: u32,
) -> Result<QuotientPresentation> {
    stabilize(w, order, cap, jacobian_ideal)
}

/// `C[[x]] / (J_W + (W))`.
pub fn tjurina_algebra(
    w: &JetPolynomial,
    order: Option<u32>,
    cap: u32,
) -> Result<QuotientPresentation> {
    stabilize(w, order, cap, |w| {
        let mut g = jacobian_ideal(w);
        g.push(w.clone());
        g
    })
}

/// Unique representative of `[p]` supported on the basis of `q`.
pub fn normal_form(p: &JetPolynomial, q: &QuotientPresentation) -> Result<JetPolynomial> {
    if !q.is_stable() {
        return Err(Error::Unstable(q.order()));
    }
    Ok(q.reduce(p))
}

/// Outcome of the quasi-homogeneity test.
#[derive(Debug, Clone)]
pub struct QuasiHomogeneity {
    pub quasi_homogeneous: bool,
    /// Residue of `W` in the Milnor algebra.
    pub residue: JetPolynomial,
    /// Coefficients `γ_i` with `W = Σ γ_i ∂_i W` modulo `m^{N+1}`.
    pub witness: Option<Vec<JetPolynomial>>,
    pub order: u32,
}

/// Decides `W ∈ J_W` on a stable Milnor presentation and, when it holds,
/// extracts a vector field `γ` with `W = Σ γ_i ∂_i W` from the row reduction.
pub fn is_quasi_homogeneous(
    w: &JetPolynomial,
    milnor: &QuotientPresentation,
) -> Result<QuasiHomogeneity> {
    let residue = normal_form(w, milnor)?;
    let order = milnor.order();
    if !residue.is_zero() {
        return Ok(QuasiHomogeneity {
            quasi_homogeneous: false,
            residue,
            witness: None,
            order,
        });
    }
    let n = w.nvars();
    let tracked = reduce_at(n, milnor.generators(), order, true);
    let target = tracked.columns.vector(&w.truncate(order));
    let combo = tracked
        .echelon
        .solve(&target)
        .ok_or_else(|| Error::Invariant("membership certificate missing".into()))?;
    let per_gen = tracked.columns.monos.len();
    let mut gamma = vec![JetPolynomial::zero(n, order); n];
    for (tag, c) in combo {
        let (g, mi) = (tag / per_gen, tag % per_gen);
        gamma[g].add_term(tracked.columns.monos[mi].clone(), c);
    }
    Ok(QuasiHomogeneity {
        quasi_homogeneous: true,
        residue,
        witness: Some(gamma),
        order,
    })
}

/// Checks `W ≡ Σ γ_i ∂_i W` in the jet of order `order`.
pub fn verify_euler_witness(w: &JetPolynomial, gamma: &[JetPolynomial], order: u32) -> bool {
    let mut acc = JetPolynomial::zero(w.nvars(), order);
    for (i, g) in gamma.iter().enumerate() {
        let d = w.derivative(i).with_order(order);
        acc = &acc + &(&g.with_order(order) * &d);
    }
    (&acc - &w.truncate(order)).is_zero()
}

/// `Σ (w_i/d) x_i ∂_i W`, exactly; equals `W` when `W` is weighted
/// homogeneous of degree `d` for weights `w_i`.
pub fn euler_field_image(w: &JetPolynomial, weights: &[Rational], d: &Rational) -> JetPolynomial {
    let n = w.nvars();
    let mut acc = JetPolynomial::zero(n, w.order());
    for i in 0..n {
        let xi = JetPolynomial::var(n, i, w.order());
        let term = (&xi * &w.derivative(i).with_order(w.order())).scale(&(&weights[i] / d));
        acc = &acc + &term;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::parse::parse_poly;
    use crate::rational::{frac, q};

    fn v(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn p(s: &str, names: &[&str]) -> JetPolynomial {
        parse_poly(s, &v(names)).unwrap()
    }

    #[test]
    fn jacobian_examples() {
        let w = p("x^2+y^2+z^2+w^2", &["x", "y", "z", "w"]);
        let j = jacobian_ideal(&w);
        for (i, g) in j.iter().enumerate() {
            let mut e = vec![0; 4];
            e[i] = 1;
            assert_eq!(g.terms().len(), 1);
            assert_eq!(g.coeff(&Monomial(e)), q(2));
        }
        let j = jacobian_ideal(&p("x^3", &["x"]));
        assert_eq!(j[0].coeff(&Monomial(vec![2])), q(3));
        let zero = JetPolynomial::zero(3, 4);
        assert!(jacobian_ideal(&zero).iter().all(JetPolynomial::is_zero));
    }

    #[test]
    fn normal_forms_in_cubic_milnor_algebra() {
        let w = p("x^3", &["x"]);
        let m = milnor_algebra(&w, None, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(m.basis(), &[Monomial(vec![0]), Monomial(vec![1])]);
        assert!(normal_form(&p("x^3", &["x"]), &m).unwrap().is_zero());
        let one = p("1", &["x"]);
        assert_eq!(normal_form(&one, &m).unwrap(), one.truncate(m.order()));
        let r = normal_form(&p("x^2+x", &["x"]), &m).unwrap();
        assert_eq!(r, p("x", &["x"]).with_order(m.order()));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let zero = JetPolynomial::zero(2, 3);
        assert!(matches!(
            milnor_algebra(&zero, None, 10),
            Err(Error::Precondition(_))
        ));
        let lin = p("x + y^2", &["x", "y"]);
        assert!(matches!(
            milnor_algebra(&lin, None, 10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn non_isolated_reports_instability() {
        let w = p("x*y*z", &["x", "y", "z"]);
        assert!(matches!(milnor_algebra(&w, None, 8), Err(Error::Unstable(_))));
    }

    #[test]
    fn quadric_witness_is_euler_field() {
        let names = ["x", "y", "z", "w"];
        let w = p("x^2+y^2+z^2+w^2", &names);
        let m = milnor_algebra(&w, None, DEFAULT_ORDER_CAP).unwrap();
        let qh = is_quasi_homogeneous(&w, &m).unwrap();
        assert!(qh.quasi_homogeneous);
        let gamma = qh.witness.unwrap();
        for (i, g) in gamma.iter().enumerate() {
            let mut e = vec![0; 4];
            e[i] = 1;
            assert_eq!(g, &JetPolynomial::monomial(Monomial(e), frac(1, 2), m.order()));
        }
    }

    #[test]
    fn stable_presentation_is_idempotent() {
        let w = p("x^4+y^3", &["x", "y"]);
        let m = milnor_algebra(&w, None, DEFAULT_ORDER_CAP).unwrap();
        let again = quotient_basis(m.generators(), m.order());
        assert_eq!(again.basis(), m.basis());
        assert_eq!(m.ideal_rank() + m.basis().len(), m.jet_dimension());
    }
}
