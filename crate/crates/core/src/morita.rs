//! A∞-bimodules, the upper-triangular algebra `G` and the exact triangle
//! relating `CC(G)`, `CC(A) ⊕ CC(B)` and `C(A, X, B)`.
//!
//! Bimodule signs are the ones induced by the embedding `X ↪ G`: the mixed
//! relation on `(a_1..a_l, x, b_1..b_m)` is the A∞ relation of `G` on the
//! same tuple,
//!
//! ```text
//! Σ (-1)^{r+st+s(|g_1|+..+|g_r|)} m_{r+1+t}(g_1..g_r, m_s(g_{r+1}..g_{r+s}), ..) = 0
//! ```
//!
//! with `m_s` read as `m^A`, `m^X` or `m^B` according to the block.
//!
//! Hochschild cochains of `G` are taken relative to the two block
//! idempotents: an entry is admissible when its input tuple is composable
//! (`A..A`, `B..B` or `A..A X B..B`) and its output lies in the matching
//! block. In this complex `C(A, X, B)` is the subcomplex of `X`-valued
//! cochains and `CC(A) ⊕ CC(B)` the quotient.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ainfty::{self, render_vector, AInftyAlgebra, BasisEntry};
use crate::error::{Error, Result};
use crate::hochschild::{self, Cochain, TruncatedComplex};
use crate::linalg::{self, axpy, Echelon, SparseVec};
use crate::rational::{format_rational, parse_rational, sign, Rational};
use crate::superlin::{Parity, SuperSpace, CONVENTION};

/// Actions `m_{l,m} : A^{⊗l} ⊗ X ⊗ B^{⊗m} → X`. An action key lists
/// `a_1..a_l, x, b_1..b_m` as indices into the respective bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AInftyBimodule {
    left: SuperSpace,
    right: SuperSpace,
    space: SuperSpace,
    actions: BTreeMap<(usize, usize), BTreeMap<Vec<usize>, SparseVec>>,
}

impl AInftyBimodule {
    pub fn new(left: SuperSpace, right: SuperSpace, space: SuperSpace) -> Self {
        AInftyBimodule {
            left,
            right,
            space,
            actions: BTreeMap::new(),
        }
    }

    /// The zero bimodule.
    pub fn zero(a: &AInftyAlgebra, b: &AInftyAlgebra) -> Self {
        Self::new(a.space().clone(), b.space().clone(), SuperSpace::from_pairs(&[]))
    }

    /// `A` over `(A, A)` with `m_{l,m} = m^A_{l+m+1}`.
    pub fn diagonal(a: &AInftyAlgebra) -> Self {
        let mut x = Self::new(a.space().clone(), a.space().clone(), a.space().clone());
        for (k, m) in a.products() {
            for (t, v) in m.entries() {
                for l in 0..k {
                    let key = (l, k - 1 - l);
                    let slot = x.actions.entry(key).or_default().entry(t.clone()).or_default();
                    axpy(slot, &Rational::from_integer(1.into()), v);
                }
            }
        }
        x
    }

    pub fn left(&self) -> &SuperSpace {
        &self.left
    }

    pub fn right(&self) -> &SuperSpace {
        &self.right
    }

    pub fn space(&self) -> &SuperSpace {
        &self.space
    }

    pub fn actions(&self) -> impl Iterator<Item = ((usize, usize), &BTreeMap<Vec<usize>, SparseVec>)> {
        self.actions.iter().map(|(k, v)| (*k, v))
    }

    /// Largest `l + m + 1` with a nonzero action.
    pub fn k_max(&self) -> usize {
        self.actions
            .iter()
            .filter(|(_, m)| !m.is_empty())
            .map(|((l, m), _)| l + m + 1)
            .max()
            .unwrap_or(0)
    }

    fn key_parity(&self, l: usize, key: &[usize]) -> Parity {
        let mut p = self.space.parity(key[l]);
        p += self.left.tuple_parity(&key[..l]);
        p += self.right.tuple_parity(&key[l + 1..]);
        p & 1
    }

    /// Adds `c · out` to `m_{l,m}(key)`; the action must have parity
    /// `l + m + 1`.
    pub fn add_action(&mut self, l: usize, m: usize, key: Vec<usize>, out: usize, c: Rational) -> Result<()> {
        if key.len() != l + m + 1 {
            return Err(Error::ArityMismatch {
                expected: l + m + 1,
                got: key.len(),
            });
        }
        let in_range = key[..l].iter().all(|&i| i < self.left.dim())
            && key[l] < self.space.dim()
            && key[l + 1..].iter().all(|&i| i < self.right.dim())
            && out < self.space.dim();
        if !in_range {
            return Err(Error::Schema(format!("m_{{{l},{m}}}: basis index out of range")));
        }
        let p = (self.key_parity(l, &key) + self.space.parity(out)) & 1;
        if p as usize != (l + m + 1) % 2 {
            return Err(Error::Parity(format!("m_{{{l},{m}}} must have parity {}", (l + m + 1) % 2)));
        }
        let slot = self.actions.entry((l, m)).or_default().entry(key.clone()).or_default();
        linalg::add_entry(slot, out, c);
        if slot.is_empty() {
            self.actions.get_mut(&(l, m)).expect("present").remove(&key);
        }
        Ok(())
    }

    pub fn action(&self, l: usize, m: usize, key: &[usize]) -> Option<&SparseVec> {
        self.actions.get(&(l, m))?.get(key)
    }
}

/// `A`, `B`, `X` and the glued algebra `G` on `A ⊔ X ⊔ B`.
#[derive(Debug, Clone)]
pub struct TriangularAlgebra {
    pub a: AInftyAlgebra,
    pub b: AInftyAlgebra,
    pub x: AInftyBimodule,
    pub g: AInftyAlgebra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Block {
    A,
    X,
    B,
}

impl TriangularAlgebra {
    pub fn block(&self, i: usize) -> Block {
        let (na, nx) = (self.a.dim(), self.x.space.dim());
        if i < na {
            Block::A
        } else if i < na + nx {
            Block::X
        } else {
            Block::B
        }
    }

    fn offset(&self, blk: Block) -> usize {
        match blk {
            Block::A => 0,
            Block::X => self.a.dim(),
            Block::B => self.a.dim() + self.x.space.dim(),
        }
    }

    /// Splits a composable `A..A X B..B` tuple into local indices.
    fn split_mixed(&self, t: &[usize]) -> Option<(usize, usize, Vec<usize>)> {
        let p = t.iter().position(|&i| self.block(i) == Block::X)?;
        let ok = t[..p].iter().all(|&i| self.block(i) == Block::A)
            && t[p + 1..].iter().all(|&i| self.block(i) == Block::B);
        if !ok {
            return None;
        }
        let ox = self.offset(Block::X);
        let ob = self.offset(Block::B);
        let mut key: Vec<usize> = t[..p].to_vec();
        key.push(t[p] - ox);
        key.extend(t[p + 1..].iter().map(|&i| i - ob));
        Some((p, t.len() - 1 - p, key))
    }

    /// The block a composable tuple maps into, or `None`.
    pub fn composable(&self, t: &[usize]) -> Option<Block> {
        if t.is_empty() {
            return None;
        }
        if t.iter().all(|&i| self.block(i) == Block::A) {
            return Some(Block::A);
        }
        if t.iter().all(|&i| self.block(i) == Block::B) {
            return Some(Block::B);
        }
        self.split_mixed(t).map(|_| Block::X)
    }

    /// Composable tuples of arity `n` containing the `X` slot, in
    /// lexicographic order.
    pub fn mixed_tuples(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if n == 0 || self.x.space.dim() == 0 {
            return out;
        }
        for l in 0..n {
            let m = n - 1 - l;
            let a = self.a.space().tuples(l).collect::<Vec<_>>();
            let b = self.b.space().tuples(m).collect::<Vec<_>>();
            for ta in &a {
                for x in 0..self.x.space.dim() {
                    for tb in &b {
                        let mut t = ta.clone();
                        t.push(self.offset(Block::X) + x);
                        t.extend(tb.iter().map(|&i| i + self.offset(Block::B)));
                        out.push(t);
                    }
                }
            }
        }
        out.sort();
        out
    }
}

fn prefixed(tag: &str, sp: &SuperSpace) -> Vec<(String, Parity)> {
    (0..sp.dim())
        .map(|i| (format!("{tag}:{}", sp.name(i)), sp.parity(i)))
        .collect()
}

/// Assembles `G`. Basis names are prefixed `A:`, `X:`, `B:`. Callers are
/// expected to have checked the relations of `A` and `B`.
pub fn glue(a: &AInftyAlgebra, b: &AInftyAlgebra, x: &AInftyBimodule) -> Result<TriangularAlgebra> {
    if x.left != *a.space() || x.right != *b.space() {
        return Err(Error::Precondition(
            "bimodule is not over the given algebras".into(),
        ));
    }
    let mut basis = prefixed("A", a.space());
    basis.extend(prefixed("X", &x.space));
    basis.extend(prefixed("B", b.space()));
    let space = SuperSpace::new(basis)?;
    let g = AInftyAlgebra::new(space, None)?;
    let mut tri = TriangularAlgebra {
        a: a.clone(),
        b: b.clone(),
        x: x.clone(),
        g,
    };
    let (ox, ob) = (tri.offset(Block::X), tri.offset(Block::B));
    let mut g = tri.g.clone();
    for (_, m) in a.products() {
        for (t, v) in m.entries() {
            for (o, c) in v {
                g.add_entry(t.clone(), *o, c.clone())?;
            }
        }
    }
    for (_, m) in b.products() {
        for (t, v) in m.entries() {
            let t: Vec<usize> = t.iter().map(|&i| i + ob).collect();
            for (o, c) in v {
                g.add_entry(t.clone(), o + ob, c.clone())?;
            }
        }
    }
    for ((l, _), m) in &x.actions {
        for (key, v) in m {
            let mut t: Vec<usize> = key[..*l].to_vec();
            t.push(key[*l] + ox);
            t.extend(key[l + 1..].iter().map(|&i| i + ob));
            for (o, c) in v {
                g.add_entry(t.clone(), o + ox, c.clone())?;
            }
        }
    }
    tri.g = g;
    Ok(tri)
}

/// Mixed relation on `(a_1..a_l, x, b_1..b_m)`, evaluated from the
/// bimodule data alone.
pub fn mixed_relation_value(
    a: &AInftyAlgebra,
    b: &AInftyAlgebra,
    x: &AInftyBimodule,
    l: usize,
    key: &[usize],
) -> SparseVec {
    let n = key.len();
    let m = n - 1 - l;
    let parity = |j: usize| -> usize {
        if j < l {
            a.space().parity(key[j]) as usize
        } else if j == l {
            x.space.parity(key[j]) as usize
        } else {
            b.space().parity(key[j]) as usize
        }
    };
    let mut out = SparseVec::new();
    for s in 1..=n {
        for r in 0..=n - s {
            let t = n - r - s;
            let pre: usize = (0..r).map(parity).sum();
            let sg = sign(r + s * t + s * pre);
            let (inner, ol, om) = if r + s <= l {
                (a.product(s).and_then(|p| p.get(&key[r..r + s])), l - s + 1, m)
            } else if r > l {
                (b.product(s).and_then(|p| p.get(&key[r..r + s])), l, m - s + 1)
            } else {
                (x.action(l - r, r + s - 1 - l, &key[r..r + s]), r, t)
            };
            let Some(inner) = inner else { continue };
            let mut outer_key: Vec<usize> = Vec::with_capacity(r + 1 + t);
            outer_key.extend_from_slice(&key[..r]);
            outer_key.push(0);
            outer_key.extend_from_slice(&key[r + s..]);
            for (y, c) in inner {
                outer_key[r] = *y;
                if let Some(v) = x.action(ol, om, &outer_key) {
                    axpy(&mut out, &(c * &sg), v);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BimoduleReport {
    pub n_max: usize,
    pub passed: bool,
    pub tuples_checked: usize,
    /// First failure of the mixed identity evaluated from bimodule data.
    pub first_violation: Option<ainfty::Violation>,
    /// First failure of the `G` relations on mixed tuples.
    pub glued_violation: Option<ainfty::Violation>,
    pub paths_agree: bool,
}

/// Checks the bimodule relations up to arity `n_max` by two evaluators:
/// the mixed identity from the actions, and the relations of `G`.
pub fn check_bimodule(tri: &TriangularAlgebra, n_max: usize) -> BimoduleReport {
    let sp = tri.g.space();
    let violation = |n: usize, t: &[usize], v: &SparseVec| ainfty::Violation {
        arity: n,
        inputs: t.iter().map(|&i| sp.name(i).to_string()).collect(),
        indices: t.to_vec(),
        value: render_vector(sp, v),
    };
    let ox = tri.offset(Block::X);
    let mut checked = 0;
    let mut direct = None;
    let mut glued = None;
    'outer: for n in 1..=n_max {
        for t in tri.mixed_tuples(n) {
            checked += 1;
            if direct.is_none() {
                let (l, _, key) = tri.split_mixed(&t).expect("mixed tuple");
                let v = mixed_relation_value(&tri.a, &tri.b, &tri.x, l, &key);
                if !v.is_empty() {
                    let v: SparseVec = v.into_iter().map(|(i, c)| (i + ox, c)).collect();
                    direct = Some(violation(n, &t, &v));
                }
            }
            if glued.is_none() {
                let v = ainfty::relation_value(&tri.g, &t);
                if !v.is_empty() {
                    glued = Some(violation(n, &t, &v));
                }
            }
            if direct.is_some() && glued.is_some() {
                break 'outer;
            }
        }
    }
    let paths_agree = direct.as_ref().map(|v| (&v.indices, &v.value))
        == glued.as_ref().map(|v| (&v.indices, &v.value));
    BimoduleReport {
        n_max,
        passed: direct.is_none() && glued.is_none(),
        tuples_checked: checked,
        first_violation: direct,
        glued_violation: glued,
        paths_agree,
    }
}

/// Restriction of a `G`-cochain to inputs and output in the `A` block.
pub fn restrict_a(tri: &TriangularAlgebra, c: &Cochain) -> Cochain {
    restrict(tri, c, Block::A, tri.a.space())
}

/// Restriction of a `G`-cochain to inputs and output in the `B` block.
pub fn restrict_b(tri: &TriangularAlgebra, c: &Cochain) -> Cochain {
    restrict(tri, c, Block::B, tri.b.space())
}

fn restrict(tri: &TriangularAlgebra, c: &Cochain, blk: Block, sp: &SuperSpace) -> Cochain {
    let off = tri.offset(blk);
    let mut out = Cochain::zero(sp.clone(), c.shifted());
    for (_, m) in c.components() {
        for (t, v) in m.entries() {
            if !t.iter().all(|&i| tri.block(i) == blk) {
                continue;
            }
            let local: Vec<usize> = t.iter().map(|&i| i - off).collect();
            for (o, x) in v {
                if tri.block(*o) == blk {
                    out.add_entry(local.clone(), o - off, x.clone()).expect("parity preserved");
                }
            }
        }
    }
    out
}

/// Embeds an `A`- or `B`-cochain into `G`.
pub fn embed(tri: &TriangularAlgebra, c: &Cochain, blk: Block) -> Cochain {
    let off = tri.offset(blk);
    let mut out = Cochain::zero(tri.g.space().clone(), c.shifted());
    for (_, m) in c.components() {
        for (t, v) in m.entries() {
            let t: Vec<usize> = t.iter().map(|&i| i + off).collect();
            for (o, x) in v {
                out.add_entry(t.clone(), o + off, x.clone()).expect("parity preserved");
            }
        }
    }
    out
}

/// Cochain of `C(A, X, B)`: a `G`-cochain supported on `A..A X B..B`
/// tuples with values in `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreePartyCochain {
    inner: Cochain,
}

impl ThreePartyCochain {
    pub fn new(tri: &TriangularAlgebra, c: Cochain) -> Result<Self> {
        for (_, m) in c.components() {
            for (t, v) in m.entries() {
                let ok = tri.composable(t) == Some(Block::X)
                    && v.keys().all(|&o| tri.block(o) == Block::X);
                if !ok {
                    return Err(Error::Precondition(format!(
                        "entry on {t:?} is not an X-valued mixed entry"
                    )));
                }
            }
        }
        Ok(ThreePartyCochain { inner: c })
    }

    pub fn cochain(&self) -> &Cochain {
        &self.inner
    }

    pub fn into_cochain(self) -> Cochain {
        self.inner
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    /// Entries of `Hom(A^{⊗l} ⊗ X ⊗ B^{⊗m}, X)` in local indices.
    pub fn component(&self, tri: &TriangularAlgebra, l: usize, m: usize) -> BTreeMap<Vec<usize>, SparseVec> {
        let ox = tri.offset(Block::X);
        let mut out = BTreeMap::new();
        let Some(c) = self.inner.component(l + m + 1) else { return out };
        for (t, v) in c.entries() {
            if let Some((ll, mm, key)) = tri.split_mixed(t) {
                if (ll, mm) == (l, m) {
                    out.insert(key, v.iter().map(|(o, x)| (o - ox, x.clone())).collect());
                }
            }
        }
        out
    }
}

fn x_part(tri: &TriangularAlgebra, c: &Cochain) -> Cochain {
    let mut out = Cochain::zero(c.space().clone(), c.shifted());
    for (_, m) in c.components() {
        for (t, v) in m.entries() {
            if tri.composable(t) != Some(Block::X) {
                continue;
            }
            for (o, x) in v {
                if tri.block(*o) == Block::X {
                    out.add_entry(t.clone(), *o, x.clone()).expect("parity preserved");
                }
            }
        }
    }
    out
}

/// The décalage of the actions, as a `G`-cochain.
fn action_structure(tri: &TriangularAlgebra) -> Cochain {
    x_part(tri, &hochschild::structure_cochain(&tri.g))
}

/// Differential of `C(A, X, B)`: minus the `X`-part of `{b_G, c}`, modulo
/// arities above `l`. With this sign `α` and `β` are chain maps.
pub fn differential_c(tri: &TriangularAlgebra, c: &ThreePartyCochain, l: usize) -> ThreePartyCochain {
    let b = hochschild::structure_cochain(&tri.g);
    let d = hochschild::gerstenhaber(&b, &c.inner, l).0;
    let minus_one = -Rational::from_integer(1.into());
    ThreePartyCochain {
        inner: x_part(tri, &d).scaled(&minus_one),
    }
}

/// `α(f) = Σ m^X(a_1..a_r, f(..), .., x, ..)`, keeping arities up to `l`.
/// The flag reports whether a component above `l` was discarded.
pub fn alpha(tri: &TriangularAlgebra, f: &Cochain, l: usize) -> (ThreePartyCochain, bool) {
    let (c, dropped) = hochschild::brace(&action_structure(tri), &embed(tri, f, Block::A), l);
    (ThreePartyCochain { inner: c }, dropped)
}

/// `β(f) = -Σ m^X(.., x, b_1..b_r, f(..), ..)`. The sign makes the composite
/// of the triangle read `α - β`.
pub fn beta(tri: &TriangularAlgebra, f: &Cochain, l: usize) -> (ThreePartyCochain, bool) {
    let (c, dropped) = hochschild::brace(&action_structure(tri), &embed(tri, f, Block::B), l);
    let minus_one = -Rational::from_integer(1.into());
    (ThreePartyCochain { inner: c.scaled(&minus_one) }, dropped)
}

/// Per-parity numbers, indexed by Hochschild parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ByParity {
    pub even: usize,
    pub odd: usize,
}

impl ByParity {
    fn from_fn(f: impl Fn(Parity) -> usize) -> Self {
        ByParity { even: f(0), odd: f(1) }
    }

    pub fn get(&self, p: Parity) -> usize {
        if p & 1 == 0 {
            self.even
        } else {
            self.odd
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriangleReport {
    pub window: usize,
    /// Cohomology of the relative complex of `G`.
    pub g: ByParity,
    /// Cohomology of the quotient `CC(A) ⊕ CC(B)`.
    pub quotient: ByParity,
    /// Cohomology of `C(A, X, B)`, graded by `G`-degree.
    pub three_party: ByParity,
    /// Cohomology of `CC(A)` and `CC(B)` computed on their own.
    pub a: ByParity,
    pub b: ByParity,
    pub quotient_matches: bool,
    /// Ranks of the maps in cohomology, indexed by source parity.
    pub inclusion_rank: ByParity,
    pub restriction_rank: ByParity,
    pub connecting_rank: ByParity,
    pub exact: bool,
    pub euler_characteristic: i64,
    pub composite_checked: usize,
    pub composite_ok: bool,
    pub passed: bool,
}

/// Largest relative basis `triangle_check` accepts.
pub const TRIANGLE_BASIS_CAP: usize = 6000;

type Elem = (Vec<usize>, usize);

struct Relative {
    // Indexed by shifted parity.
    basis: [Vec<Elem>; 2],
    block: [Vec<Block>; 2],
    // d[q][j]: image of basis element j of parity q, in parity q ^ 1.
    d: [Vec<SparseVec>; 2],
}

impl Relative {
    fn build(tri: &TriangularAlgebra, l: usize) -> Result<Self> {
        let sp = tri.g.space();
        let mut basis: [Vec<Elem>; 2] = [Vec::new(), Vec::new()];
        let mut block: [Vec<Block>; 2] = [Vec::new(), Vec::new()];
        for arity in (0..=l).rev() {
            let mut tuples: Vec<(Vec<usize>, Vec<Block>)> = Vec::new();
            if arity == 0 {
                tuples.push((Vec::new(), vec![Block::A, Block::B]));
            } else {
                for t in sp.tuples(arity) {
                    if let Some(blk) = tri.composable(&t) {
                        tuples.push((t, vec![blk]));
                    }
                }
            }
            for (t, blks) in tuples {
                let tp = sp.tuple_parity(&t);
                for o in 0..sp.dim() {
                    let ob = tri.block(o);
                    if !blks.contains(&ob) {
                        continue;
                    }
                    let q = CONVENTION.map_shifted(arity, (sp.parity(o) + tp) & 1) as usize;
                    basis[q].push((t.clone(), o));
                    block[q].push(ob);
                }
            }
            if basis[0].len() + basis[1].len() > TRIANGLE_BASIS_CAP {
                return Err(Error::Precondition(format!(
                    "relative complex exceeds {TRIANGLE_BASIS_CAP} basis cochains at window {l}"
                )));
            }
        }
        let b = hochschild::structure_cochain(&tri.g);
        let mut d: [Vec<SparseVec>; 2] = [Vec::new(), Vec::new()];
        for q in 0..2 {
            let index: HashMap<(&[usize], usize), usize> = basis[q ^ 1]
                .iter()
                .enumerate()
                .map(|(j, (t, o))| ((t.as_slice(), *o), j))
                .collect();
            for (t, o) in &basis[q] {
                let mut e = Cochain::zero(sp.clone(), q as Parity);
                e.add_entry(t.clone(), *o, one()).expect("basis respects parity");
                let img = hochschild::gerstenhaber(&b, &e, l).0;
                let mut col = SparseVec::new();
                for (_, m) in img.components() {
                    for (tt, v) in m.entries() {
                        for (oo, c) in v {
                            let j = index
                                .get(&(tt.as_slice(), *oo))
                                .expect("the relative complex is closed under the differential");
                            linalg::add_entry(&mut col, *j, c.clone());
                        }
                    }
                }
                d[q].push(col);
            }
        }
        Ok(Relative { basis, block, d })
    }

    fn project(&self, q: usize, v: &SparseVec, keep: &[Block]) -> SparseVec {
        v.iter()
            .filter(|(j, _)| keep.contains(&self.block[q][**j]))
            .map(|(j, c)| (*j, c.clone()))
            .collect()
    }

    fn apply(&self, q: usize, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (j, c) in v {
            axpy(&mut out, c, &self.d[q][*j]);
        }
        out
    }

    /// Cocycles of the subquotient spanned by `keep`, in global coordinates.
    fn cocycles(&self, q: usize, keep: &[Block]) -> Vec<SparseVec> {
        let cols: Vec<usize> = (0..self.basis[q].len())
            .filter(|&j| keep.contains(&self.block[q][j]))
            .collect();
        let images: Vec<SparseVec> = cols.iter().map(|&j| self.project(q ^ 1, &self.d[q][j], keep)).collect();
        let (_, kernel) = linalg::rank_kernel(&images);
        kernel
            .into_iter()
            .map(|v| v.into_iter().map(|(i, c)| (cols[i], c)).collect())
            .collect()
    }

    fn coboundaries(&self, q: usize, keep: &[Block]) -> Echelon {
        let mut e = Echelon::new();
        for j in 0..self.basis[q ^ 1].len() {
            if keep.contains(&self.block[q ^ 1][j]) {
                e.insert(self.project(q, &self.d[q ^ 1][j], keep), SparseVec::new());
            }
        }
        e
    }

    fn to_cochain(&self, tri: &TriangularAlgebra, q: usize, v: &SparseVec) -> Cochain {
        let mut c = Cochain::zero(tri.g.space().clone(), q as Parity);
        for (j, x) in v {
            let (t, o) = &self.basis[q][*j];
            c.add_entry(t.clone(), *o, x.clone()).expect("basis respects parity");
        }
        c
    }
}

fn one() -> Rational {
    Rational::from_integer(1.into())
}

/// Rank of the induced map given images of cocycles and the target's
/// coboundaries.
fn induced_rank(images: impl IntoIterator<Item = SparseVec>, boundaries: &Echelon) -> usize {
    let mut span = boundaries.clone();
    for v in images {
        span.insert(v, SparseVec::new());
    }
    span.rank() - boundaries.rank()
}

const AB: [Block; 2] = [Block::A, Block::B];
const XS: [Block; 1] = [Block::X];
const ALL: [Block; 3] = [Block::A, Block::X, Block::B];

/// Truncated cohomology of `CC(G)`, `CC(A) ⊕ CC(B)` and `C(A, X, B)` at
/// window `l`, the ranks of the three maps of the long exact sequence, and
/// the composite `(α - β) ∘ (restrict_A ⊕ restrict_B)` on cocycles.
///
/// Truncation by arity is compatible with the short exact sequence
/// `C(A, X, B) → CC(G) → CC(A) ⊕ CC(B)`, so the hexagon is exact for every
/// window. On a cocycle `c` of `G` the composite equals `∂_C(c_X)`; the
/// check compares both sides entrywise.
pub fn triangle_check(tri: &TriangularAlgebra, l: usize) -> Result<TriangleReport> {
    let (rel, (ha, hb)) = std::thread::scope(|s| {
        let ja = s.spawn(|| {
            let cx = TruncatedComplex::new(&tri.a, l);
            ByParity::from_fn(|p| cx.cohomology(p).dimension)
        });
        let jb = s.spawn(|| {
            let cx = TruncatedComplex::new(&tri.b, l);
            ByParity::from_fn(|p| cx.cohomology(p).dimension)
        });
        let rel = Relative::build(tri, l);
        (rel, (ja.join().expect("worker"), jb.join().expect("worker")))
    });
    let rel = rel?;
    // Everything below is indexed by shifted parity q; Hochschild parity
    // is q ^ 1.
    let z = |q: usize, keep: &[Block]| rel.cocycles(q, keep);
    let zg = [z(0, &ALL), z(1, &ALL)];
    let zq = [z(0, &AB), z(1, &AB)];
    let zx = [z(0, &XS), z(1, &XS)];
    let bg = [rel.coboundaries(0, &ALL), rel.coboundaries(1, &ALL)];
    let bq = [rel.coboundaries(0, &AB), rel.coboundaries(1, &AB)];
    let bx = [rel.coboundaries(0, &XS), rel.coboundaries(1, &XS)];
    let h = |zs: &[Vec<SparseVec>; 2], bs: &[Echelon; 2]| {
        ByParity::from_fn(|p| {
            let q = (p ^ 1) as usize;
            zs[q].len() - bs[q].rank()
        })
    };
    let g = h(&zg, &bg);
    let quotient = h(&zq, &bq);
    let three_party = h(&zx, &bx);
    let inclusion_rank = ByParity::from_fn(|p| {
        let q = (p ^ 1) as usize;
        induced_rank(zx[q].iter().cloned(), &bg[q])
    });
    let restriction_rank = ByParity::from_fn(|p| {
        let q = (p ^ 1) as usize;
        induced_rank(zg[q].iter().map(|v| rel.project(q, v, &AB)), &bq[q])
    });
    let connecting_rank = ByParity::from_fn(|p| {
        let q = (p ^ 1) as usize;
        induced_rank(
            zq[q].iter().map(|v| rel.project(q ^ 1, &rel.apply(q, v), &XS)),
            &bx[q ^ 1],
        )
    });
    let mut exact = true;
    for p in 0..2u8 {
        let o = p ^ 1;
        exact &= three_party.get(p) == connecting_rank.get(o) + inclusion_rank.get(p);
        exact &= g.get(p) == inclusion_rank.get(p) + restriction_rank.get(p);
        exact &= quotient.get(p) == restriction_rank.get(p) + connecting_rank.get(p);
    }
    let euler_characteristic = [three_party, g, quotient]
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let s = if i % 2 == 0 { 1 } else { -1 };
            s * (d.even as i64 - d.odd as i64)
        })
        .sum();
    let quotient_matches = quotient.even == ha.even + hb.even && quotient.odd == ha.odd + hb.odd;

    let mut composite_checked = 0;
    let mut composite_ok = true;
    for q in 0..2 {
        for v in &zg[q] {
            let c = rel.to_cochain(tri, q, v);
            let (fa, _) = alpha(tri, &restrict_a(tri, &c), l);
            let (fb, _) = beta(tri, &restrict_b(tri, &c), l);
            let lhs = fa.inner.sub(&fb.inner);
            let cx = ThreePartyCochain { inner: x_part(tri, &c) };
            let rhs = differential_c(tri, &cx, l);
            composite_checked += 1;
            composite_ok &= lhs.sub(&rhs.inner).is_zero();
        }
    }
    Ok(TriangleReport {
        window: l,
        g,
        quotient,
        three_party,
        a: ha,
        b: hb,
        quotient_matches,
        inclusion_rank,
        restriction_rank,
        connecting_rank,
        exact,
        euler_characteristic,
        composite_checked,
        composite_ok,
        passed: exact && quotient_matches && composite_ok,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionEntry {
    l: usize,
    m: usize,
    inputs: Vec<String>,
    x: String,
    output: String,
    coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BimoduleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    left: String,
    right: String,
    basis: Vec<BasisEntry>,
    actions: Vec<ActionEntry>,
}

/// A loaded bimodule with the algebra references it names.
#[derive(Debug, Clone)]
pub struct LoadedBimodule {
    pub bimodule: AInftyBimodule,
    pub left: String,
    pub right: String,
    pub note: Option<String>,
}

/// Parses a bimodule file against already loaded algebras. The `inputs`
/// of an action list `a_1..a_l` (names in `A`) then `b_1..b_m` (names in `B`).
pub fn load_bimodule_str(text: &str, a: &AInftyAlgebra, b: &AInftyAlgebra) -> Result<LoadedBimodule> {
    let file: BimoduleFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let space = SuperSpace::new(file.basis.iter().map(|e| (e.name.clone(), e.parity)).collect())?;
    let mut x = AInftyBimodule::new(a.space().clone(), b.space().clone(), space.clone());
    let find = |sp: &SuperSpace, n: &str| sp.index_of(n).ok_or_else(|| Error::DanglingName(n.to_string()));
    for (i, e) in file.actions.iter().enumerate() {
        if e.inputs.len() != e.l + e.m {
            return Err(Error::Schema(format!(
                "action entry #{i}: l + m = {} but {} inputs",
                e.l + e.m,
                e.inputs.len()
            )));
        }
        let mut key = Vec::with_capacity(e.l + e.m + 1);
        for n in &e.inputs[..e.l] {
            key.push(find(a.space(), n)?);
        }
        key.push(find(&space, &e.x)?);
        for n in &e.inputs[e.l..] {
            key.push(find(b.space(), n)?);
        }
        let out = find(&space, &e.output)?;
        let c = parse_rational(&e.coeff).map_err(|err| match err {
            Error::ZeroDenominator(_) => err,
            _ => Error::Schema(format!("action entry #{i}: bad coefficient `{}`", e.coeff)),
        })?;
        x.add_action(e.l, e.m, key, out, c).map_err(|err| match err {
            Error::Parity(_) => Error::Parity(format!("action entry #{i} violates the parity rule")),
            other => other,
        })?;
    }
    Ok(LoadedBimodule {
        bimodule: x,
        left: file.left,
        right: file.right,
        note: file.note,
    })
}

/// Loads a bimodule file and the two algebra files it references, resolved
/// relative to the bimodule file.
pub fn load_triple(path: &std::path::Path) -> Result<(AInftyAlgebra, AInftyAlgebra, LoadedBimodule)> {
    let text = std::fs::read_to_string(path)?;
    #[derive(Deserialize)]
    struct Refs {
        left: String,
        right: String,
    }
    let refs: Refs = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    let dir = path.parent().unwrap_or(std::path::Path::new("."));
    let a = ainfty::load_algebra(&dir.join(&refs.left))?.algebra;
    let b = ainfty::load_algebra(&dir.join(&refs.right))?.algebra;
    let x = load_bimodule_str(&text, &a, &b)?;
    Ok((a, b, x))
}

/// Canonical JSON for a bimodule.
pub fn save_bimodule_string(x: &AInftyBimodule, left: &str, right: &str, note: Option<&str>) -> String {
    let mut actions = Vec::new();
    for ((l, m), map) in &x.actions {
        for (key, v) in map {
            let mut inputs: Vec<String> = key[..*l].iter().map(|&i| x.left.name(i).to_string()).collect();
            inputs.extend(key[l + 1..].iter().map(|&i| x.right.name(i).to_string()));
            for (o, c) in v {
                actions.push(ActionEntry {
                    l: *l,
                    m: *m,
                    inputs: inputs.clone(),
                    x: x.space.name(key[*l]).to_string(),
                    output: x.space.name(*o).to_string(),
                    coeff: format_rational(c),
                });
            }
        }
    }
    let file = BimoduleFile {
        note: note.map(str::to_string),
        left: left.to_string(),
        right: right.to_string(),
        basis: (0..x.space.dim())
            .map(|i| BasisEntry {
                name: x.space.name(i).to_string(),
                parity: x.space.parity(i),
            })
            .collect(),
        actions,
    };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::{check_ainfty, ground_field, truncated_polynomial};
    use crate::rational::q;

    fn upper_triangular() -> TriangularAlgebra {
        let k = ground_field();
        let mut x = AInftyBimodule::new(k.space().clone(), k.space().clone(), SuperSpace::from_pairs(&[("e", 0)]));
        x.add_action(1, 0, vec![0, 0], 0, q(1)).unwrap();
        x.add_action(0, 1, vec![0, 0], 0, q(1)).unwrap();
        glue(&k, &k, &x).unwrap()
    }

    #[test]
    fn zero_bimodule_glues_to_product() {
        let a = truncated_polynomial(2);
        let b = ground_field();
        let tri = glue(&a, &b, &AInftyBimodule::zero(&a, &b)).unwrap();
        assert_eq!(tri.g.dim(), 3);
        assert!(check_ainfty(&tri.g, 4).passed);
        let r = check_bimodule(&tri, 4);
        assert!(r.passed && r.tuples_checked == 0);
    }

    #[test]
    fn upper_triangular_matrices_are_associative() {
        let tri = upper_triangular();
        assert!(check_ainfty(&tri.g, 4).passed);
        let r = check_bimodule(&tri, 4);
        assert!(r.passed && r.paths_agree);
    }

    #[test]
    fn wrong_sign_action_is_flagged_by_both_paths() {
        let k = ground_field();
        let mut x = AInftyBimodule::new(k.space().clone(), k.space().clone(), SuperSpace::from_pairs(&[("e", 0)]));
        x.add_action(1, 0, vec![0, 0], 0, q(1)).unwrap();
        x.add_action(0, 1, vec![0, 0], 0, q(2)).unwrap();
        let tri = glue(&k, &k, &x).unwrap();
        let r = check_bimodule(&tri, 3);
        assert!(!r.passed && r.paths_agree);
        assert!(!check_ainfty(&tri.g, 3).passed);
    }

    #[test]
    fn restriction_recovers_the_blocks() {
        let tri = upper_triangular();
        let m = ainfty::as_cochain(&tri.g);
        assert_eq!(restrict_a(&tri, &m), ainfty::as_cochain(&tri.a));
        assert_eq!(restrict_b(&tri, &m), ainfty::as_cochain(&tri.b));
    }

    #[test]
    fn triangle_for_upper_triangular_matrices() {
        let tri = upper_triangular();
        let r = triangle_check(&tri, 4).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.composite_checked > 0);
        assert_eq!(r.euler_characteristic, 0);
    }

    #[test]
    fn bimodule_json_round_trip() {
        let tri = upper_triangular();
        let s = save_bimodule_string(&tri.x, "k.json", "k.json", None);
        let back = load_bimodule_str(&s, &tri.a, &tri.b).unwrap();
        assert_eq!(back.bimodule, tri.x);
        assert_eq!(save_bimodule_string(&back.bimodule, "k.json", "k.json", None), s);
    }
}
