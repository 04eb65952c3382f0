//! ℤ/2-graded linear algebra on spaces with a fixed ordered basis.
//!
//! Multilinear maps are stored as sparse tables from input basis tuples to
//! output vectors. Scalars are even, so multilinear extension needs no signs;
//! signs enter only through [`koszul_sign`] and the operations built on it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, SparseVec};
use crate::rational::Rational;

pub type Parity = u8;

/// Sign bookkeeping shared by every module.
///
/// All signs are computed from the shifted degree `|a|' = |a| + 1 (mod 2)`.
/// An `i`-ary map of unshifted parity `p` has shifted degree `i + p + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignConvention {
    pub id: &'static str,
    pub shifted_degree: &'static str,
    pub insertion: &'static str,
    pub bracket: &'static str,
    pub decalage: &'static str,
    pub differential: &'static str,
    pub ainfty: &'static str,
    pub cup: &'static str,
    pub bimodule: &'static str,
    pub de_rham: &'static str,
}

pub const CONVENTION: SignConvention = SignConvention {
    id: "shifted-z2/v1",
    shifted_degree: "|a|' = |a|+1; |f|' = arity(f)+parity(f)+1",
    insertion: "f o_i g = (-1)^{|g|'(|a_1|'+...+|a_{i-1}|')} f(a_1,..,g(a_i,..),..)",
    bracket: "{f,g} = f o g - (-1)^{|f|'|g|'} g o f",
    decalage: "b_k(a_1..a_k) = -(-1)^{sum_j (k-j)(|a_j|+1) + (k-1)(k-2)/2} m_k(a_1..a_k)",
    differential: "d f = {b, f}; twisted: d' f = {b + b', f}",
    ainfty: "sum_{r+s+t=n} (-1)^{r+st+s(|a_1|+..+|a_r|)} m_u(a_1..a_r, m_s(..), ..) = 0",
    cup: "(f u g)(a) = (-1)^{|g|(|a_1|+..+|a_n|+n)} m_2(f(a_1..a_n), g(a_{n+1}..)), n = arity(f)",
    bimodule: "A-infinity relation of the triangular algebra G on (a_1..a_l, x, b_1..b_m)",
    de_rham: "g xi_J -> g i(xi_j1)..i(xi_jl)(dx_1^..^dx_n); {W,-} -> -dW^",
};

impl SignConvention {
    pub fn shifted(&self, p: Parity) -> Parity {
        (p + 1) & 1
    }

    /// Shifted degree of an `arity`-ary map with unshifted parity `p`.
    pub fn map_shifted(&self, arity: usize, p: Parity) -> Parity {
        ((arity as u8 & 1) + p + 1) & 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuperSpace {
    names: Vec<String>,
    parity: Vec<Parity>,
}

impl SuperSpace {
    pub fn new(basis: Vec<(String, Parity)>) -> Result<Self> {
        let mut names = Vec::with_capacity(basis.len());
        let mut parity = Vec::with_capacity(basis.len());
        for (n, p) in basis {
            if p > 1 {
                return Err(Error::Parity(format!("basis element `{n}` has parity {p}")));
            }
            if names.contains(&n) {
                return Err(Error::Schema(format!("duplicate basis name `{n}`")));
            }
            names.push(n);
            parity.push(p);
        }
        Ok(SuperSpace { names, parity })
    }

    /// Convenience constructor; panics on duplicate names.
    pub fn from_pairs(basis: &[(&str, Parity)]) -> Self {
        Self::new(basis.iter().map(|(n, p)| (n.to_string(), *p)).collect())
            .expect("valid basis")
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.parity[i]
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parity
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn tuple_parity(&self, t: &[usize]) -> Parity {
        t.iter().fold(0, |acc, &i| acc ^ self.parity[i])
    }

    /// Direct sum; names of `other` must not clash with ours.
    pub fn direct_sum(&self, other: &SuperSpace) -> Result<SuperSpace> {
        let mut basis: Vec<(String, Parity)> = self
            .names
            .iter()
            .cloned()
            .zip(self.parity.iter().copied())
            .collect();
        basis.extend(other.names.iter().cloned().zip(other.parity.iter().copied()));
        SuperSpace::new(basis)
    }

    /// All basis tuples of length `k` in lexicographic order.
    pub fn tuples(&self, k: usize) -> Tuples {
        Tuples::new(self.dim(), k)
    }

    /// Parity of a vector, or `None` when it mixes parities. Zero is even.
    pub fn vector_parity(&self, v: &SparseVec) -> Option<Parity> {
        let mut ps = v.keys().map(|&i| self.parity[i]);
        let first = ps.next().unwrap_or(0);
        ps.all(|p| p == first).then_some(first)
    }
}

/// Lexicographic enumeration of `{0..dim}^k`.
#[derive(Debug, Clone)]
pub struct Tuples {
    dim: usize,
    cur: Option<Vec<usize>>,
}

impl Tuples {
    pub fn new(dim: usize, k: usize) -> Self {
        let cur = if dim == 0 && k > 0 {
            None
        } else {
            Some(vec![0; k])
        };
        Tuples { dim, cur }
    }
}

impl Iterator for Tuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let mut next = out.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < self.dim {
                self.cur = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    }
}

/// Sign of reordering `x_0..x_{k-1}` into `x_{perm[0]}, .., x_{perm[k-1]}`,
/// counting each transposition of two shifted-odd elements as `-1`.
pub fn koszul_sign(degrees: &[Parity], perm: &[usize]) -> i8 {
    let shifted: Vec<Parity> = degrees.iter().map(|&d| CONVENTION.shifted(d)).collect();
    let mut odd = 0u32;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] && shifted[perm[i]] == 1 && shifted[perm[j]] == 1 {
                odd += 1;
            }
        }
    }
    if odd % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Multilinear map `A^{⊗k} → B` of fixed parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperMap {
    arity: usize,
    source: SuperSpace,
    target: SuperSpace,
    parity: Parity,
    entries: BTreeMap<Vec<usize>, SparseVec>,
}

impl SuperMap {
    pub fn zero(arity: usize, source: SuperSpace, target: SuperSpace, parity: Parity) -> Self {
        SuperMap {
            arity,
            source,
            target,
            parity: parity & 1,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(space: &SuperSpace) -> Self {
        let mut f = Self::zero(1, space.clone(), space.clone(), 0);
        for i in 0..space.dim() {
            f.entries
                .insert(vec![i], [(i, Rational::from_integer(1.into()))].into());
        }
        f
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn source(&self) -> &SuperSpace {
        &self.source
    }

    pub fn target(&self) -> &SuperSpace {
        &self.target
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, SparseVec> {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `c * e_out` to the value on `inputs`, enforcing the parity rule.
    pub fn add_entry(&mut self, inputs: Vec<usize>, out: usize, c: Rational) -> Result<()> {
        if inputs.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: inputs.len(),
            });
        }
        let want = (self.parity + self.source.tuple_parity(&inputs)) & 1;
        if self.target.parity(out) != want {
            return Err(Error::Parity(format!(
                "entry ({}) -> {} breaks parity {}",
                inputs
                    .iter()
                    .map(|&i| self.source.name(i))
                    .collect::<Vec<_>>()
                    .join(","),
                self.target.name(out),
                self.parity
            )));
        }
        let slot = self.entries.entry(inputs.clone()).or_default();
        linalg::add_entry(slot, out, c);
        if slot.is_empty() {
            self.entries.remove(&inputs);
        }
        Ok(())
    }

    /// Adds `c * v` to the value on `inputs` without the parity check; used by
    /// internal constructions whose parity is guaranteed by construction.
    pub fn accumulate(&mut self, inputs: &[usize], c: &Rational, v: &SparseVec) {
        let slot = self.entries.entry(inputs.to_vec()).or_default();
        axpy(slot, c, v);
        if slot.is_empty() {
            self.entries.remove(inputs);
        }
    }

    /// Value on a basis tuple.
    pub fn apply(&self, inputs: &[usize]) -> Result<SparseVec> {
        if inputs.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: inputs.len(),
            });
        }
        Ok(self.entries.get(inputs).cloned().unwrap_or_default())
    }

    /// Value on a basis tuple, by reference; `None` means zero.
    pub fn get(&self, inputs: &[usize]) -> Option<&SparseVec> {
        self.entries.get(inputs)
    }

    /// Multilinear extension to arbitrary input vectors.
    pub fn apply_vectors(&self, inputs: &[SparseVec]) -> Result<SparseVec> {
        if inputs.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: inputs.len(),
            });
        }
        let mut out = SparseVec::new();
        for (t, v) in &self.entries {
            let mut c = Rational::from_integer(1.into());
            for (slot, &i) in t.iter().enumerate() {
                match inputs[slot].get(&i) {
                    Some(x) => c *= x,
                    None => {
                        c = Rational::from_integer(0.into());
                        break;
                    }
                }
            }
            axpy(&mut out, &c, v);
        }
        Ok(out)
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.arity, self.source.clone(), self.target.clone(), self.parity);
        for (t, v) in &self.entries {
            out.accumulate(t, c, v);
        }
        out
    }

    /// `self + c * other`; shapes must agree.
    pub fn add_scaled(&mut self, c: &Rational, other: &SuperMap) {
        debug_assert_eq!(self.arity, other.arity);
        for (t, v) in &other.entries {
            self.accumulate(t, c, v);
        }
    }

    /// The map `a_1..a_k ↦ ± f(a_{perm[0]}, .., a_{perm[k-1]})` with the
    /// Koszul sign of the reordering.
    pub fn permute_inputs(&self, perm: &[usize]) -> Self {
        let mut out = Self::zero(self.arity, self.source.clone(), self.target.clone(), self.parity);
        for t in self.source.tuples(self.arity) {
            let permuted: Vec<usize> = perm.iter().map(|&p| t[p]).collect();
            if let Some(v) = self.entries.get(&permuted) {
                let ds: Vec<Parity> = t.iter().map(|&i| self.source.parity(i)).collect();
                let s = koszul_sign(&ds, perm);
                out.accumulate(&t, &Rational::from_integer(s.into()), v);
            }
        }
        out
    }

    /// Dense column images, one per input tuple in lexicographic order, with
    /// rows indexed by target basis.
    pub fn images(&self) -> Vec<SparseVec> {
        self.source
            .tuples(self.arity)
            .map(|t| self.entries.get(&t).cloned().unwrap_or_default())
            .collect()
    }
}

/// Rank and kernel of the linear map whose columns are given by `maps`
/// stacked side by side (columns of each map in lexicographic tuple order).
pub fn rank_kernel(maps: &[SuperMap]) -> (usize, Vec<SparseVec>) {
    let images: Vec<SparseVec> = maps.iter().flat_map(SuperMap::images).collect();
    linalg::rank_kernel(&images)
}
