//! Hochschild cochains, braces, the Gerstenhaber bracket, cup product and
//! truncated cohomology.
//!
//! Cochains are stored unshifted: an arity-`i` component of parity `p` is a
//! map `A^{⊗i} → A` of parity `p`. Its Hochschild degree is `i + p` and its
//! shifted degree `|f|' = i + p + 1`. Braces use the Koszul rule in shifted
//! degrees,
//!
//! ```text
//! (f ∘_i g)(a_1..) = (-1)^{|g|'(|a_1|'+..+|a_{i-1}|')} f(a_1..a_{i-1}, g(a_i..), ..)
//! ```
//!
//! A∞ products enter the bracket calculus through the décalage
//! `b_k(a) = -(-1)^{Σ_j (k-j)(|a_j|+1)} m_k(a)`, for which `{b,b} = 0` is
//! equivalent to the A∞ relations and `{b, f}` reproduces the explicit
//! three-term differential.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ainfty::{AInftyAlgebra, BasisEntry, ProductEntry};
use crate::error::{Error, Result};
use crate::linalg::{self, axpy, Echelon, SparseVec};
use crate::rational::{format_rational, parse_rational, sign, Rational};
use crate::superlin::{Parity, SuperMap, SuperSpace, CONVENTION};

/// Sum of homogeneous components sharing one shifted degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    space: SuperSpace,
    shifted: Parity,
    comps: BTreeMap<usize, SuperMap>,
}

impl Cochain {
    pub fn zero(space: SuperSpace, shifted: Parity) -> Self {
        Cochain {
            space,
            shifted: shifted & 1,
            comps: BTreeMap::new(),
        }
    }

    pub fn space(&self) -> &SuperSpace {
        &self.space
    }

    /// Shifted degree `|f|'`.
    pub fn shifted(&self) -> Parity {
        self.shifted
    }

    /// Hochschild degree `|f| = |f|' + 1 (mod 2)`.
    pub fn degree(&self) -> Parity {
        (self.shifted + 1) & 1
    }

    /// Unshifted parity required of an arity-`i` component.
    pub fn component_parity(&self, i: usize) -> Parity {
        (self.shifted + i as u8 + 1) & 1
    }

    pub fn component(&self, i: usize) -> Option<&SuperMap> {
        self.comps.get(&i)
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, &SuperMap)> {
        self.comps.iter().map(|(i, m)| (*i, m))
    }

    pub fn max_arity(&self) -> Option<usize> {
        self.comps.keys().next_back().copied()
    }

    pub fn min_arity(&self) -> Option<usize> {
        self.comps.keys().next().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn set_component(&mut self, m: SuperMap) -> Result<()> {
        let i = m.arity();
        if m.parity() != self.component_parity(i) {
            return Err(Error::Parity(format!(
                "arity-{i} component of a cochain with shifted degree {} must have parity {}",
                self.shifted,
                self.component_parity(i)
            )));
        }
        if m.is_zero() {
            self.comps.remove(&i);
        } else {
            self.comps.insert(i, m);
        }
        Ok(())
    }

    /// Adds `c` to the coefficient of `out` in the value on `inputs`.
    pub fn add_entry(&mut self, inputs: Vec<usize>, out: usize, c: Rational) -> Result<()> {
        let i = inputs.len();
        let p = self.component_parity(i);
        let mut m = self
            .comps
            .remove(&i)
            .unwrap_or_else(|| SuperMap::zero(i, self.space.clone(), self.space.clone(), p));
        let r = m.add_entry(inputs, out, c);
        if !m.is_zero() {
            self.comps.insert(i, m);
        }
        r
    }

    fn accumulate(&mut self, arity: usize, t: &[usize], c: &Rational, v: &SparseVec) {
        let p = self.component_parity(arity);
        let m = self
            .comps
            .entry(arity)
            .or_insert_with(|| SuperMap::zero(arity, self.space.clone(), self.space.clone(), p));
        m.accumulate(t, c, v);
        if m.is_zero() {
            self.comps.remove(&arity);
        }
    }

    /// `self + c * other`; shifted degrees must agree.
    pub fn add_scaled(&mut self, c: &Rational, other: &Cochain) {
        assert_eq!(self.shifted, other.shifted, "adding cochains of different degree");
        for (i, m) in &other.comps {
            for (t, v) in m.entries() {
                self.accumulate(*i, t, c, v);
            }
        }
    }

    pub fn scaled(&self, c: &Rational) -> Cochain {
        let mut out = Cochain::zero(self.space.clone(), self.shifted);
        out.add_scaled(c, self);
        out
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        let mut out = self.clone();
        out.add_scaled(&one(), other);
        out
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        let mut out = self.clone();
        out.add_scaled(&-one(), other);
        out
    }

    /// Drops components of arity above `l`.
    pub fn truncate(&self, l: usize) -> Cochain {
        Cochain {
            space: self.space.clone(),
            shifted: self.shifted,
            comps: self
                .comps
                .iter()
                .filter(|(i, _)| **i <= l)
                .map(|(i, m)| (*i, m.clone()))
                .collect(),
        }
    }

    /// Restricts to inputs avoiding `unit`.
    pub fn normalized(&self, unit: usize) -> Cochain {
        let mut out = Cochain::zero(self.space.clone(), self.shifted);
        for (i, m) in &self.comps {
            for (t, v) in m.entries() {
                if !t.contains(&unit) {
                    out.accumulate(*i, t, &one(), v);
                }
            }
        }
        out
    }

    /// Applies the décalage sign entrywise (an involution).
    pub fn decalage(&self) -> Cochain {
        let mut out = Cochain::zero(self.space.clone(), self.shifted);
        for (i, m) in &self.comps {
            out.comps.insert(*i, decalage(m));
        }
        out
    }
}

fn one() -> Rational {
    Rational::from_integer(1.into())
}

/// Sign `-(-1)^{Σ_j (k-j)(|a_j|+1) + (k-1)(k-2)/2}` relating `m_k` and
/// `b_k` on a basis tuple. The arity term makes `b∘b = 0` match the
/// relations `Σ (-1)^{r+st} m_u(1^r ⊗ m_s ⊗ 1^t) = 0` in every arity.
pub fn decalage_sign(space: &SuperSpace, t: &[usize]) -> Rational {
    let k = t.len();
    let e: usize = t
        .iter()
        .enumerate()
        .map(|(j, &a)| (k - 1 - j) * (space.parity(a) as usize + 1))
        .sum();
    let arity = k.saturating_sub(1) * k.saturating_sub(2) / 2;
    sign(e + arity + 1)
}

pub fn decalage(m: &SuperMap) -> SuperMap {
    let mut out = SuperMap::zero(m.arity(), m.source().clone(), m.target().clone(), m.parity());
    for (t, v) in m.entries() {
        out.accumulate(t, &decalage_sign(m.source(), t), v);
    }
    out
}

/// The décalage `b` of an A∞ structure, a shifted-odd cochain.
pub fn structure_cochain(a: &AInftyAlgebra) -> Cochain {
    let mut c = Cochain::zero(a.space().clone(), 1);
    for (_, m) in a.products() {
        c.set_component(decalage(m)).expect("b_k is shifted-odd");
    }
    c
}

/// Recovers an A∞ structure from its décalage.
pub fn algebra_from_structure(b: &Cochain, unit: Option<usize>) -> Result<AInftyAlgebra> {
    let mut a = AInftyAlgebra::new(b.space().clone(), unit)?;
    for (_, m) in b.components() {
        a.set_product(decalage(m))?;
    }
    Ok(a)
}

fn shifted_parity(space: &SuperSpace, i: usize) -> usize {
    CONVENTION.shifted(space.parity(i)) as usize
}

/// `f ∘_i g` for single components, `1 ≤ i ≤ arity(f)`.
pub fn brace_at(f: &SuperMap, g: &SuperMap, i: usize) -> Result<SuperMap> {
    let nf = f.arity();
    if i == 0 || i > nf {
        return Err(Error::SlotOutOfRange { slot: i, arity: nf });
    }
    let ng = g.arity();
    let sp = f.source();
    let g_shift = CONVENTION.map_shifted(ng, g.parity()) as usize;
    let mut out = SuperMap::zero(
        nf + ng - 1,
        sp.clone(),
        f.target().clone(),
        (f.parity() + g.parity()) & 1,
    );
    let by_output = index_by_output(g);
    let mut t = Vec::with_capacity(nf + ng - 1);
    for (tf, vf) in f.entries() {
        let Some(list) = by_output.get(&tf[i - 1]) else { continue };
        let pre: usize = tf[..i - 1].iter().map(|&a| shifted_parity(sp, a)).sum();
        let s = sign(g_shift * pre);
        for (tg, c) in list {
            t.clear();
            t.extend_from_slice(&tf[..i - 1]);
            t.extend_from_slice(tg);
            t.extend_from_slice(&tf[i..]);
            out.accumulate(&t, &(&s * *c), vf);
        }
    }
    Ok(out)
}

fn index_by_output(g: &SuperMap) -> HashMap<usize, Vec<(&Vec<usize>, &Rational)>> {
    let mut idx: HashMap<usize, Vec<(&Vec<usize>, &Rational)>> = HashMap::new();
    for (t, v) in g.entries() {
        for (o, c) in v {
            idx.entry(*o).or_default().push((t, c));
        }
    }
    idx
}

/// `f ∘ g = Σ_i f ∘_i g`, keeping arities up to `l`. The flag reports
/// whether any component above `l` was discarded.
pub fn brace(f: &Cochain, g: &Cochain, l: usize) -> (Cochain, bool) {
    let mut out = Cochain::zero(f.space.clone(), f.shifted ^ g.shifted);
    let mut dropped = false;
    for (nf, fm) in &f.comps {
        for (ng, gm) in &g.comps {
            if *nf == 0 {
                continue;
            }
            let arity = nf + ng - 1;
            if arity > l {
                dropped = true;
                continue;
            }
            for i in 1..=*nf {
                let part = brace_at(fm, gm, i).expect("slot in range");
                for (t, v) in part.entries() {
                    out.accumulate(arity, t, &one(), v);
                }
            }
        }
    }
    (out, dropped)
}

/// `{f, g} = f∘g - (-1)^{|f|'|g|'} g∘f`.
pub fn gerstenhaber(f: &Cochain, g: &Cochain, l: usize) -> (Cochain, bool) {
    let (fg, d1) = brace(f, g, l);
    let (gf, d2) = brace(g, f, l);
    let s = sign((f.shifted * g.shifted) as usize);
    let mut out = fg;
    out.add_scaled(&-s, &gf);
    (out, d1 || d2)
}

/// Cup product `f ∪ g = (-1)^{|f|'} b_2{f, g}` where `b_2` is the décalage
/// of `mu`:
///
/// ```text
/// (f∪g)(a_1..a_{n+m}) = (-1)^{|g|(|a_1|+..+|a_n|+n)} f(a_1..a_n) g(a_{n+1}..)
/// ```
///
/// with `n` the arity of `f` and `|g|` the Hochschild degree.
pub fn cup(f: &Cochain, g: &Cochain, mu: &SuperMap, l: usize) -> (Cochain, bool) {
    let sp = &f.space;
    let mut out = Cochain::zero(sp.clone(), f.shifted ^ g.shifted ^ 1);
    let g_deg = g.degree() as usize;
    let mut dropped = false;
    for (nf, fm) in &f.comps {
        for (ng, gm) in &g.comps {
            let arity = nf + ng;
            if arity > l {
                dropped = true;
                continue;
            }
            for (tf, vf) in fm.entries() {
                let pre: usize = tf.iter().map(|&a| sp.parity(a) as usize).sum::<usize>() + nf;
                let s = sign(g_deg * pre);
                for (tg, vg) in gm.entries() {
                    let mut prod = SparseVec::new();
                    for (x, cx) in vf {
                        for (y, cy) in vg {
                            if let Some(v) = mu.get(&[*x, *y]) {
                                axpy(&mut prod, &(cx * cy), v);
                            }
                        }
                    }
                    let t: Vec<usize> = tf.iter().chain(tg.iter()).copied().collect();
                    out.accumulate(arity, &t, &s, &prod);
                }
            }
        }
    }
    (out, dropped)
}

/// The explicit three-term differential of an associative product `mu`:
///
/// ```text
/// ∂f(a_1..a_n) = -(-1)^{(|a_1|+1)|f|} a_1 f(a_2..a_n)
///                - Σ_{i=2}^{n} (-1)^{ε_i} f(a_1.., a_{i-1}a_i, .., a_n)
///                + (-1)^{ε_n} f(a_1..a_{n-1}) a_n
/// ε_i = |f| + |a_1| + .. + |a_{i-1}| - i + 1
/// ```
pub fn explicit_differential(mu: &SuperMap, f: &Cochain) -> Cochain {
    let sp = &f.space;
    let fd = f.degree() as usize;
    let mut out = Cochain::zero(sp.clone(), f.shifted ^ 1);
    let mul = |x: &SparseVec, y: &SparseVec| -> SparseVec {
        let mut acc = SparseVec::new();
        for (i, ci) in x {
            for (j, cj) in y {
                if let Some(v) = mu.get(&[*i, *j]) {
                    axpy(&mut acc, &(ci * cj), v);
                }
            }
        }
        acc
    };
    let unit_vec = |i: usize| -> SparseVec { [(i, one())].into() };
    for (k, fm) in &f.comps {
        let n = k + 1;
        for t in sp.tuples(n) {
            let par = |j: usize| sp.parity(t[j]) as usize;
            let mut acc = SparseVec::new();
            // -(-1)^{(|a_1|+1)|f|} a_1 f(a_2..a_n)
            if let Some(v) = fm.get(&t[1..]) {
                let s = -sign((par(0) + 1) * fd);
                axpy(&mut acc, &s, &mul(&unit_vec(t[0]), v));
            }
            // ε_i with 1-based i; the sum of |a_j| runs over j < i.
            let eps = |i: usize| -> usize {
                let pre: usize = (0..i - 1).map(par).sum();
                (fd + pre + 2 * n - i + 1) % 2
            };
            for i in 2..=n {
                let prod = mu.get(&[t[i - 2], t[i - 1]]);
                let Some(prod) = prod else { continue };
                let s = -sign(eps(i));
                for (x, c) in prod {
                    let mut inner: Vec<usize> = t[..i - 2].to_vec();
                    inner.push(*x);
                    inner.extend_from_slice(&t[i..]);
                    if let Some(v) = fm.get(&inner) {
                        axpy(&mut acc, &(&s * c), v);
                    }
                }
            }
            if let Some(v) = fm.get(&t[..n - 1]) {
                let s = sign(eps(n));
                axpy(&mut acc, &s, &mul(v, &unit_vec(t[n - 1])));
            }
            out.accumulate(n, &t, &one(), &acc);
        }
    }
    out
}

/// Quotient of the Hochschild complex by cochains of arity above `l`.
#[derive(Debug, Clone)]
pub struct TruncatedComplex {
    algebra: AInftyAlgebra,
    b: Cochain,
    l: usize,
    normalized: bool,
}

impl TruncatedComplex {
    pub fn new(algebra: &AInftyAlgebra, l: usize) -> Self {
        TruncatedComplex {
            b: structure_cochain(algebra),
            algebra: algebra.clone(),
            l,
            normalized: false,
        }
    }

    /// The complex twisted by a Maurer–Cartan perturbation `m'`.
    pub fn twisted(algebra: &AInftyAlgebra, m_prime: &AInftyAlgebra, l: usize) -> Result<Self> {
        let total = algebra.perturbed(m_prime)?;
        Ok(Self::new(&total, l))
    }

    /// Restricts to normalized cochains when the algebra has a unit.
    pub fn normalized(mut self, yes: bool) -> Self {
        self.normalized = yes && self.algebra.unit().is_some();
        self
    }

    pub fn algebra(&self) -> &AInftyAlgebra {
        &self.algebra
    }

    pub fn structure(&self) -> &Cochain {
        &self.b
    }

    pub fn window(&self) -> usize {
        self.l
    }

    pub fn k_max(&self) -> usize {
        self.algebra.k_max()
    }

    /// `∂f = {b, f}`; fails when the result could leave the window.
    pub fn differential(&self, f: &Cochain) -> Result<Cochain> {
        let top = f.max_arity().unwrap_or(0);
        let k = self.k_max().max(1);
        if top + k - 1 > self.l {
            return Err(Error::TruncationOverflow {
                arity: top,
                window: self.l,
            });
        }
        Ok(gerstenhaber(&self.b, f, self.l).0)
    }

    /// `{b, f}` modulo arities above the window.
    pub fn differential_truncated(&self, f: &Cochain) -> Cochain {
        gerstenhaber(&self.b, f, self.l).0
    }

    /// Cohomology in Hochschild parity `parity`, with a stability probe:
    /// the number of classes below arity `L - K_max` must agree for the
    /// windows `L = l - 1` and `L = l`.
    pub fn cohomology(&self, parity: Parity) -> CohomologyReport {
        let threshold = self.l.saturating_sub(self.k_max().max(1));
        let here = self.cohomology_at(self.l, threshold, parity);
        let stable = if self.l == 0 {
            false
        } else {
            let prev_threshold = (self.l - 1).saturating_sub(self.k_max().max(1));
            let prev = self.cohomology_at(self.l - 1, prev_threshold, parity);
            prev.low_dimension == here.low_dimension
        };
        CohomologyReport {
            window: self.l,
            k_max: self.k_max(),
            normalized: self.normalized,
            parity,
            dimension: here.dimension,
            threshold,
            low_dimension: here.low_dimension,
            stable,
            representatives: here.reps,
        }
    }

    fn basis(&self, l: usize, shifted: Parity) -> Vec<(usize, Vec<usize>, usize)> {
        let sp = self.algebra.space();
        let unit = if self.normalized { self.algebra.unit() } else { None };
        let mut out = Vec::new();
        for arity in (0..=l).rev() {
            for t in sp.tuples(arity) {
                if unit.is_some_and(|u| t.contains(&u)) {
                    continue;
                }
                let tp = sp.tuple_parity(&t);
                for o in 0..sp.dim() {
                    let p = (sp.parity(o) + tp) & 1;
                    if CONVENTION.map_shifted(arity, p) == shifted {
                        out.push((arity, t.clone(), o));
                    }
                }
            }
        }
        out
    }

    fn matrix(
        &self,
        l: usize,
        source: &[(usize, Vec<usize>, usize)],
        target: &[(usize, Vec<usize>, usize)],
        shifted: Parity,
    ) -> Vec<SparseVec> {
        let sp = self.algebra.space();
        let index: HashMap<(&[usize], usize), usize> = target
            .iter()
            .enumerate()
            .map(|(j, (_, t, o))| ((t.as_slice(), *o), j))
            .collect();
        source
            .iter()
            .map(|(_, t, o)| {
                let mut e = Cochain::zero(sp.clone(), shifted);
                e.add_entry(t.clone(), *o, one()).expect("basis respects parity");
                let d = gerstenhaber(&self.b, &e, l).0;
                let mut col = SparseVec::new();
                for (_, m) in d.components() {
                    for (tt, v) in m.entries() {
                        for (oo, c) in v {
                            if let Some(&j) = index.get(&(tt.as_slice(), *oo)) {
                                linalg::add_entry(&mut col, j, c.clone());
                            }
                        }
                    }
                }
                col
            })
            .collect()
    }

    fn cohomology_at(&self, l: usize, threshold: usize, parity: Parity) -> RawCohomology {
        let q = (parity + 1) & 1;
        let cq = self.basis(l, q);
        let cq1 = self.basis(l, q ^ 1);
        let d_q = self.matrix(l, &cq, &cq1, q);
        let d_q1 = self.matrix(l, &cq1, &cq, q ^ 1);
        let (_, kernel) = linalg::rank_kernel(&d_q);
        let mut image = Echelon::new();
        for v in &d_q1 {
            image.insert(v.clone(), SparseVec::new());
        }
        let low = |col: usize| cq[col].0 <= threshold;
        let low_image = image.pivot_columns().filter(|&c| low(c)).count();
        let mut kern = Echelon::new();
        for v in &kernel {
            kern.insert(v.clone(), SparseVec::new());
        }
        let low_kernel = kern.pivot_columns().filter(|&c| low(c)).count();
        let mut reps = Vec::new();
        let mut classes = image.clone();
        let mut ordered: Vec<&SparseVec> = kernel.iter().collect();
        // Prefer low-arity representatives.
        ordered.sort_by_key(|v| std::cmp::Reverse(v.keys().next().copied()));
        for v in ordered {
            if let linalg::Insertion::Pivot(_) = classes.insert(v.clone(), SparseVec::new()) {
                let sp = self.algebra.space();
                let mut c = Cochain::zero(sp.clone(), q);
                for (j, x) in v {
                    let (_, t, o) = &cq[*j];
                    c.add_entry(t.clone(), *o, x.clone()).expect("basis respects parity");
                }
                reps.push(c);
            }
        }
        RawCohomology {
            dimension: kernel.len() - image.rank(),
            low_dimension: low_kernel - low_image,
            reps,
        }
    }
}

impl TruncatedComplex {
    /// Basis of the cocycles supported in a single arity. Only meaningful
    /// when the differential preserves arity grading (a pure `m_2`).
    pub fn cocycle_basis(&self, arity: usize, shifted: Parity) -> Vec<Cochain> {
        let sp = self.algebra.space();
        let source: Vec<_> = self
            .basis(self.l, shifted)
            .into_iter()
            .filter(|(i, _, _)| *i == arity)
            .collect();
        let target = self.basis(self.l, shifted ^ 1);
        let images = self.matrix(self.l, &source, &target, shifted);
        let (_, kernel) = linalg::rank_kernel(&images);
        kernel
            .into_iter()
            .map(|v| {
                let mut c = Cochain::zero(sp.clone(), shifted);
                for (j, x) in v {
                    let (_, t, o) = &source[j];
                    c.add_entry(t.clone(), *o, x).expect("basis respects parity");
                }
                c
            })
            .collect()
    }
}

struct RawCohomology {
    dimension: usize,
    low_dimension: usize,
    reps: Vec<Cochain>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CohomologyReport {
    pub window: usize,
    pub k_max: usize,
    pub normalized: bool,
    pub parity: Parity,
    /// Dimension of the cohomology of the truncated complex.
    pub dimension: usize,
    /// Classes are counted below this arity for the stability probe.
    pub threshold: usize,
    pub low_dimension: usize,
    pub stable: bool,
    #[serde(skip)]
    pub representatives: Vec<Cochain>,
}

/// Solves `{b, y} = target` within the window, by least arity bound first.
/// Returns `None` when no solution exists with `y` of arity at most `l`.
pub fn solve_coboundary(cx: &TruncatedComplex, target: &Cochain) -> Option<Cochain> {
    let q = target.shifted ^ 1;
    let l = cx.l;
    let source = cx.basis(l, q);
    let tgt = cx.basis(l, target.shifted);
    let images = cx.matrix(l, &source, &tgt, q);
    let index: HashMap<(&[usize], usize), usize> = tgt
        .iter()
        .enumerate()
        .map(|(j, (_, t, o))| ((t.as_slice(), *o), j))
        .collect();
    let mut rhs = SparseVec::new();
    for (_, m) in target.truncate(l).components() {
        for (t, v) in m.entries() {
            for (o, c) in v {
                let j = *index.get(&(t.as_slice(), *o))?;
                linalg::add_entry(&mut rhs, j, c.clone());
            }
        }
    }
    let mut ech = Echelon::tracking();
    for (j, im) in images.iter().enumerate() {
        ech.insert(im.clone(), [(j, one())].into());
    }
    let sol = ech.solve(&rhs)?;
    let mut y = Cochain::zero(cx.algebra.space().clone(), q);
    for (j, c) in sol {
        let (_, t, o) = &source[j];
        y.add_entry(t.clone(), *o, c).expect("basis respects parity");
    }
    Some(y)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CochainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    window: usize,
    degree: u8,
    basis: Vec<BasisEntry>,
    products: Vec<ProductEntry>,
}

/// Serializes a cochain in the algebra file layout, with an arity window
/// and the Hochschild degree as header fields.
pub fn save_cochain_string(c: &Cochain, window: usize, note: Option<&str>) -> String {
    let sp = &c.space;
    let mut products = Vec::new();
    for (k, m) in &c.comps {
        for (t, v) in m.entries() {
            for (o, x) in v {
                products.push(ProductEntry {
                    arity: *k,
                    inputs: t.iter().map(|&i| sp.name(i).to_string()).collect(),
                    output: sp.name(*o).to_string(),
                    coeff: format_rational(x),
                });
            }
        }
    }
    let file = CochainFile {
        note: note.map(str::to_string),
        window,
        degree: c.degree(),
        basis: (0..sp.dim())
            .map(|i| BasisEntry {
                name: sp.name(i).to_string(),
                parity: sp.parity(i),
            })
            .collect(),
        products,
    };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

/// Inverse of [`save_cochain_string`]; returns the cochain and its window.
pub fn load_cochain_str(text: &str) -> Result<(Cochain, usize)> {
    let file: CochainFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let space = SuperSpace::new(file.basis.iter().map(|b| (b.name.clone(), b.parity)).collect())?;
    let mut c = Cochain::zero(space.clone(), (file.degree + 1) & 1);
    for (i, p) in file.products.iter().enumerate() {
        if p.arity != p.inputs.len() {
            return Err(Error::Schema(format!("entry #{i}: arity does not match inputs")));
        }
        if p.arity > file.window {
            return Err(Error::TruncationOverflow {
                arity: p.arity,
                window: file.window,
            });
        }
        let idx = |n: &str| space.index_of(n).ok_or_else(|| Error::DanglingName(n.to_string()));
        let t = p.inputs.iter().map(|n| idx(n)).collect::<Result<Vec<_>>>()?;
        c.add_entry(t, idx(&p.output)?, parse_rational(&p.coeff)?)?;
    }
    Ok((c, file.window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::{exterior_one, ground_field, truncated_polynomial};
    use crate::rational::q;

    #[test]
    fn brace_with_identity_and_mu() {
        let a = truncated_polynomial(3);
        let sp = a.space().clone();
        let id = SuperMap::identity(&sp);
        let mu = a.product(2).unwrap();
        assert_eq!(&brace_at(mu, &id, 1).unwrap(), mu);
        assert_eq!(&brace_at(mu, &id, 2).unwrap(), mu);
        let mm = brace_at(mu, mu, 1).unwrap();
        for t in sp.tuples(3) {
            let inner = mu.apply(&t[..2]).unwrap();
            let mut want = SparseVec::new();
            for (x, c) in &inner {
                axpy(&mut want, c, &mu.apply(&[*x, t[2]]).unwrap());
            }
            assert_eq!(mm.apply(&t).unwrap(), want);
        }
        assert!(matches!(
            brace_at(mu, mu, 3),
            Err(Error::SlotOutOfRange { slot: 3, arity: 2 })
        ));
    }

    #[test]
    fn structure_squares_to_zero() {
        for a in [truncated_polynomial(3), exterior_one(None), exterior_one(Some(q(1)))] {
            let b = structure_cochain(&a);
            let (sq, _) = gerstenhaber(&b, &b, 6);
            assert!(sq.is_zero());
        }
    }

    #[test]
    fn explicit_and_bracket_differentials_agree() {
        let a = exterior_one(None);
        let cx = TruncatedComplex::new(&a, 6);
        let mu = a.product(2).unwrap();
        let mut f = Cochain::zero(a.space().clone(), 1);
        f.add_entry(vec![1], 0, q(3)).unwrap();
        f.add_entry(vec![0, 1], 1, q(2)).unwrap();
        f.add_entry(vec![1, 1], 0, q(-1)).unwrap();
        assert_eq!(explicit_differential(mu, &f), cx.differential(&f).unwrap());
    }

    #[test]
    fn ground_field_cohomology() {
        let cx = TruncatedComplex::new(&ground_field(), 4).normalized(true);
        let even = cx.cohomology(0);
        let odd = cx.cohomology(1);
        assert_eq!((even.dimension, odd.dimension), (1, 0));
        assert!(even.stable && odd.stable);
    }

    #[test]
    fn exterior_algebra_does_not_stabilize() {
        let a = exterior_one(None);
        let mut dims = Vec::new();
        for l in [3, 4, 5] {
            let cx = TruncatedComplex::new(&a, l).normalized(true);
            let e = cx.cohomology(0);
            let o = cx.cohomology(1);
            assert!(!(e.stable && o.stable));
            dims.push(e.dimension + o.dimension);
        }
        assert!(dims[0] < dims[1] && dims[1] < dims[2], "{dims:?}");
    }

    #[test]
    fn cochain_file_round_trip() {
        let a = truncated_polynomial(2);
        let mut f = Cochain::zero(a.space().clone(), 1);
        f.add_entry(vec![1, 1], 1, q(3)).unwrap();
        f.add_entry(vec![], 0, q(-1)).unwrap();
        let text = save_cochain_string(&f, 4, Some("example"));
        assert_eq!(load_cochain_str(&text).unwrap(), (f, 4));
    }

    #[test]
    fn differential_respects_window() {
        let a = truncated_polynomial(2);
        let cx = TruncatedComplex::new(&a, 3);
        let mut f = Cochain::zero(a.space().clone(), 0);
        f.add_entry(vec![1, 1, 1], 1, q(1)).unwrap();
        assert!(matches!(cx.differential(&f), Err(Error::TruncationOverflow { .. })));
    }
}
