//! Seeded random cochains and structures for property checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ainfty::{self, AInftyAlgebra};
use crate::hochschild::Cochain;
use crate::rational::Rational;
use crate::superlin::{Parity, SuperSpace, CONVENTION};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coeff(rng: &mut impl Rng) -> Rational {
    let n: i64 = loop {
        let n = rng.gen_range(-3..=3);
        if n != 0 {
            break n;
        }
    };
    if rng.gen_bool(0.2) {
        Rational::new(n.into(), 2.into())
    } else {
        Rational::from_integer(n.into())
    }
}

/// Random homogeneous cochain with components in `arities`; each admissible
/// entry is present with probability `density`.
pub fn cochain(
    rng: &mut impl Rng,
    space: &SuperSpace,
    shifted: Parity,
    arities: std::ops::RangeInclusive<usize>,
    density: f64,
) -> Cochain {
    let mut c = Cochain::zero(space.clone(), shifted);
    for i in arities {
        for t in space.tuples(i) {
            let tp = space.tuple_parity(&t);
            for o in 0..space.dim() {
                let p = (space.parity(o) + tp) & 1;
                if CONVENTION.map_shifted(i, p) == shifted && rng.gen_bool(density) {
                    c.add_entry(t.clone(), o, coeff(rng)).expect("admissible entry");
                }
            }
        }
    }
    c
}

/// The algebras used for property checks: `k`, `k[x]/(x^2)`, `k[x]/(x^3)`
/// and `Λ(ξ)`.
pub fn small_algebras() -> Vec<(&'static str, AInftyAlgebra)> {
    vec![
        ("k", ainfty::ground_field()),
        ("k[x]/(x^2)", ainfty::truncated_polynomial(2)),
        ("k[x]/(x^3)", ainfty::truncated_polynomial(3)),
        ("Lambda(xi)", ainfty::exterior_one(None)),
    ]
}

/// Random structure `{m_k}` for `k ≤ max_arity` on `space`, each
/// parity-admissible entry present with probability `density`.
pub fn structure(rng: &mut impl Rng, space: &SuperSpace, max_arity: usize, density: f64) -> AInftyAlgebra {
    let mut a = AInftyAlgebra::new(space.clone(), None).expect("no unit");
    for k in 1..=max_arity {
        let p = (k % 2) as Parity;
        for t in space.tuples(k) {
            let tp = space.tuple_parity(&t);
            for o in 0..space.dim() {
                if (space.parity(o) + tp) & 1 == p && rng.gen_bool(density) {
                    a.add_entry(t.clone(), o, coeff(rng)).expect("admissible entry");
                }
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let sp = SuperSpace::from_pairs(&[("1", 0), ("xi", 1)]);
        let a = cochain(&mut rng(7), &sp, 1, 0..=3, 0.5);
        let b = cochain(&mut rng(7), &sp, 1, 0..=3, 0.5);
        assert_eq!(a, b);
        let s = structure(&mut rng(3), &sp, 3, 0.3);
        assert_eq!(s, structure(&mut rng(3), &sp, 3, 0.3));
    }
}
