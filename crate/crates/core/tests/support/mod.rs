//! Oracles shared by the integration tests.
#![allow(dead_code)]

use mfhh_core::ainfty::AInftyAlgebra;
use mfhh_core::exactpoly::parse_poly_infer;
use mfhh_core::hochschild::decalage_sign;
use mfhh_core::linalg::{axpy, scale, SparseVec};
use mfhh_core::matfact::*;
use mfhh_core::rational::q;
use mfhh_core::superlin::SuperSpace;
use mfhh_core::Rational;
use num_traits::{One, Zero};
use rand::Rng;

#[derive(Debug, Clone)]
enum Tree {
    Leaf,
    Node(Box<Tree>, Box<Tree>),
}

fn trees(k: usize) -> Vec<Tree> {
    if k == 1 {
        return vec![Tree::Leaf];
    }
    let mut out = Vec::new();
    for j in 1..k {
        for l in trees(j) {
            for r in trees(k - j) {
                out.push(Tree::Node(Box::new(l.clone()), Box::new(r.clone())));
            }
        }
    }
    out
}

fn leaves(t: &Tree) -> usize {
    match t {
        Tree::Leaf => 1,
        Tree::Node(l, r) => leaves(l) + leaves(r),
    }
}

/// Value of an internal tree vertex: `b2` of its two subtrees, each
/// followed by the homotopy unless it is a leaf.
fn eval(t: &Tree, inputs: &[SparseVec], dga: &EndDga, split: &Splitting) -> SparseVec {
    match t {
        Tree::Leaf => inputs[0].clone(),
        Tree::Node(l, r) => {
            let nl = leaves(l);
            let side = |t: &Tree, xs: &[SparseVec]| {
                let v = eval(t, xs, dga, split);
                match t {
                    Tree::Leaf => v,
                    _ => split.homotopy(dga, &v),
                }
            };
            let u = side(l, &inputs[..nl]);
            let v = side(r, &inputs[nl..]);
            if u.is_empty() || v.is_empty() {
                return SparseVec::new();
            }
            let prod = dga.mul(&u, &v);
            if dga.parity(&u) == Some(1) {
                scale(&prod, &-Rational::one())
            } else {
                prod
            }
        }
    }
}

/// Brute-force transfer: every planar binary tree, no memoization.
pub fn tree_oracle(text: &str, k_max: usize) -> (AInftyAlgebra, Vec<Vec<(Vec<usize>, SparseVec)>>) {
    let (w, vars) = parse_poly_infer(text).unwrap();
    let order = default_mf_order(&w);
    let dga = endo_dga(&koszul_mf(&w.with_order(order), &vars, order).unwrap()).unwrap();
    let split = dga.splitting(good_threshold(&w, order));
    let g = split.good_dimension();
    let reps: Vec<SparseVec> = split.representatives()[..g].to_vec();
    let model = transfer(&dga, &split, k_max).unwrap();
    let space = model.algebra.space().clone();
    let mut by_arity = vec![Vec::new(); k_max + 1];
    for k in 2..=k_max {
        let ts = trees(k);
        for tuple in space.tuples(k) {
            let inputs: Vec<SparseVec> = tuple.iter().map(|&i| reps[i].clone()).collect();
            let mut b = SparseVec::new();
            for t in &ts {
                axpy(&mut b, &Rational::one(), &eval(t, &inputs, &dga, &split));
            }
            let coords = split.project(&dga, &b);
            assert!(coords.keys().all(|&c| c < g), "output leaves the good classes");
            let m = scale(&coords, &decalage_sign(&space, &tuple));
            if !m.is_empty() {
                by_arity[k].push((tuple, m));
            }
        }
    }
    (model.algebra, by_arity)
}

/// `g m_k (g^{-1})^{⊗k}` for an invertible parity-preserving `g`.
pub fn transport(a: &AInftyAlgebra, g: &[Vec<Rational>], ginv: &[Vec<Rational>]) -> AInftyAlgebra {
    let dim = a.dim();
    let apply = |m: &[Vec<Rational>], v: &SparseVec| {
        let mut out = SparseVec::new();
        for (j, c) in v {
            for i in 0..dim {
                if !m[i][*j].is_zero() {
                    axpy(&mut out, &(c * &m[i][*j]), &[(i, Rational::one())].into());
                }
            }
        }
        out
    };
    let mut b = AInftyAlgebra::new(a.space().clone(), None).unwrap();
    for (k, m) in a.products() {
        for t in a.space().tuples(k) {
            // expand (g^{-1})^{⊗k} on the basis tuple; g is even so no signs
            let mut terms: Vec<(Vec<usize>, Rational)> = vec![(Vec::new(), Rational::one())];
            for &x in &t {
                let col = apply(ginv, &[(x, Rational::one())].into());
                terms = terms
                    .into_iter()
                    .flat_map(|(pre, c)| {
                        col.iter().map(move |(y, d)| {
                            let mut p = pre.clone();
                            p.push(*y);
                            (p, &c * d)
                        })
                    })
                    .collect();
            }
            let mut acc = SparseVec::new();
            for (s, c) in terms {
                if let Some(v) = m.get(&s) {
                    axpy(&mut acc, &c, v);
                }
            }
            for (o, c) in apply(g, &acc) {
                b.add_entry(t.clone(), o, c).unwrap();
            }
        }
    }
    b
}

/// A random invertible parity-preserving change of basis, upper triangular
/// with unit diagonal within each parity, and its inverse.
pub fn random_gauge(space: &SuperSpace, r: &mut impl Rng) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let n = space.dim();
    let mut g = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        g[i][i] = Rational::one();
        for j in i + 1..n {
            if space.parity(i) == space.parity(j) && r.gen_bool(0.5) {
                g[i][j] = q(r.gen_range(-2..=2));
            }
        }
    }
    // back substitution for the inverse of a unit upper triangular matrix
    let mut inv = vec![vec![Rational::zero(); n]; n];
    for j in 0..n {
        for i in (0..=j).rev() {
            let mut s = if i == j { Rational::one() } else { Rational::zero() };
            for k in i + 1..=j {
                s -= &g[i][k] * &inv[k][j];
            }
            inv[i][j] = s;
        }
    }
    (g, inv)
}
