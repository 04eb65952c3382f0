use mfhh_core::ainfty::*;
use mfhh_core::exactpoly::parse_poly_infer;
use mfhh_core::linalg::{axpy, SparseVec};
use mfhh_core::matfact::minimal_model;
use mfhh_core::rational::{q, sign};
use mfhh_core::sample::{self, rng};
use mfhh_core::superlin::{SuperMap, SuperSpace};
use mfhh_core::Error;
use rand::Rng;

mod support;
use support::{random_gauge, transport};

fn exterior_with_m3(c: i64) -> AInftyAlgebra {
    let mut a = exterior_one(None);
    a.add_entry(vec![1, 1, 1], 0, q(c)).unwrap();
    a
}

/// Every term `m_u(1^r ⊗ m_s ⊗ 1^t)` of the arity-`n` relation written out
/// as a separate product of basis elements, signs applied by hand.
fn expanded_relation(a: &AInftyAlgebra, tuple: &[usize]) -> SparseVec {
    let n = tuple.len();
    let sp = a.space();
    let mut out = SparseVec::new();
    for s in 1..=n {
        for r in 0..=n - s {
            let t = n - r - s;
            let u = r + 1 + t;
            let (Some(ms), Some(mu)) = (a.product(s), a.product(u)) else { continue };
            let inner = ms.apply(&tuple[r..r + s]).unwrap();
            let mut koszul = 0;
            for &x in &tuple[..r] {
                koszul += s * sp.parity(x) as usize;
            }
            let base = sign(r + s * t + koszul);
            for (y, c) in &inner {
                let mut outer: Vec<usize> = tuple[..r].to_vec();
                outer.push(*y);
                outer.extend_from_slice(&tuple[r + s..]);
                let v = mu.apply(&outer).unwrap();
                axpy(&mut out, &(&base * c), &v);
            }
        }
    }
    out
}

#[test]
fn exterior_with_cubic_product_matches_expansion() {
    for c in [1, -2] {
        let a = exterior_with_m3(c);
        for n in 1..=5 {
            for t in a.space().tuples(n) {
                assert_eq!(relation_value(&a, &t), expanded_relation(&a, &t), "{t:?}");
                assert!(expanded_relation(&a, &t).is_empty(), "m3 is a cocycle: {t:?}");
            }
        }
        assert!(check_ainfty(&a, 5).passed);
    }
}

#[test]
fn non_cocycle_cubic_product_fails_at_four() {
    // m3(ξ,ξ,1) = ξ is not a Hochschild cocycle of Λ(ξ)
    let mut a = exterior_one(None);
    a.add_entry(vec![1, 1, 0], 1, q(1)).unwrap();
    let r = check_ainfty(&a, 5);
    assert!(!r.passed);
    let v = r.first_violation.unwrap();
    assert_eq!(v.arity, 4);
    assert!(!expanded_relation(&a, &v.indices).is_empty());
}

#[test]
fn minimal_file_is_the_ground_field() {
    let text = r#"{"basis": [{"name": "1", "parity": 0}], "unit": "1",
        "products": [{"arity": 2, "inputs": ["1", "1"], "output": "1", "coeff": "1"}]}"#;
    let a = load_algebra_str(text).unwrap().algebra;
    assert_eq!(a, ground_field());
}

#[test]
fn round_trip_is_identity() {
    let mut algebras: Vec<AInftyAlgebra> = sample::small_algebras().into_iter().map(|(_, a)| a).collect();
    algebras.push(exterior_with_m3(3));
    let sp = SuperSpace::from_pairs(&[("a", 0), ("b", 1), ("c", 1)]);
    algebras.push(sample::structure(&mut rng(5), &sp, 4, 0.3));
    for a in algebras {
        let text = save_algebra_string(&a, Some("round trip"));
        let back = load_algebra_str(&text).unwrap();
        assert_eq!(back.algebra, a);
        assert_eq!(back.note.as_deref(), Some("round trip"));
        assert_eq!(save_algebra_string(&back.algebra, Some("round trip")), text);
    }
}

#[test]
fn loader_errors() {
    let parity = r#"{"basis": [{"name": "1", "parity": 0}, {"name": "xi", "parity": 1}],
        "products": [{"arity": 2, "inputs": ["1", "xi"], "output": "1", "coeff": "1"}]}"#;
    match load_algebra_str(parity) {
        Err(Error::Parity(msg)) => assert!(msg.contains("#0"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let dangling = r#"{"basis": [{"name": "1", "parity": 0}],
        "products": [{"arity": 2, "inputs": ["1", "y"], "output": "1", "coeff": "1"}]}"#;
    assert_eq!(load_algebra_str(dangling).unwrap_err(), Error::DanglingName("y".into()));
    let schema = r#"{"basis": [{"name": "1", "parity": 0}], "products": [], "extra": 1}"#;
    assert!(matches!(load_algebra_str(schema), Err(Error::Schema(_))));
    let arity = r#"{"basis": [{"name": "1", "parity": 0}],
        "products": [{"arity": 3, "inputs": ["1", "1"], "output": "1", "coeff": "1"}]}"#;
    assert!(matches!(load_algebra_str(arity), Err(Error::Schema(_))));
}

#[test]
fn pagoda_fixture_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/pagoda_n2.json");
    let loaded = load_algebra(std::path::Path::new(path)).unwrap();
    let a = &loaded.algebra;
    assert_eq!(a.k_max(), 4);
    assert_eq!(a.dim(), 2);
    let higher: Vec<usize> = a.products().map(|(k, _)| k).filter(|&k| k > 2).collect();
    assert_eq!(higher, vec![4]);
    assert!(check_ainfty(a, 6).passed);
    assert!(loaded.note.is_some());
}

#[test]
fn mc_examples() {
    let a = exterior_one(None);
    let zero = AInftyAlgebra::new(a.space().clone(), None).unwrap();
    let r = mc_check(&a, &zero, 5).unwrap();
    assert!(r.relations.passed && r.bracket.passed && r.paths_agree);

    // the cubic deformation produced by transfer for W = x^3
    let (w, vars) = parse_poly_infer("x^3").unwrap();
    let model = minimal_model(&w, &vars, None, 4).unwrap();
    let m3 = model.algebra.product(3).unwrap();
    let mut m_prime = AInftyAlgebra::new(a.space().clone(), None).unwrap();
    for (t, v) in m3.entries() {
        for (o, c) in v {
            m_prime.add_entry(t.clone(), *o, c.clone()).unwrap();
        }
    }
    let r = mc_check(&a, &m_prime, 6).unwrap();
    assert!(r.relations.passed && r.bracket.passed && r.paths_agree);

    let mut wrong = SuperMap::zero(3, a.space().clone(), a.space().clone(), 0);
    wrong.add_entry(vec![1, 1, 1], 1, q(1)).unwrap();
    let mut bad = AInftyAlgebra::new(a.space().clone(), None).unwrap();
    assert!(matches!(bad.set_product(wrong), Err(Error::Parity(_))));
    assert!(matches!(bad.add_entry(vec![1, 1, 0], 0, q(1)), Err(Error::Parity(_))));
}

fn agree(a: &AInftyAlgebra, n: usize) -> (bool, bool) {
    let rel = check_ainfty(a, n);
    let br = bracket_relation(a, n);
    let same = rel.passed == br.passed
        && rel.first_violation.as_ref().map(|v| (v.arity, v.indices.clone()))
            == br.first_violation.as_ref().map(|v| (v.arity, v.indices.clone()));
    (same, rel.passed)
}

#[test]
fn relation_and_bracket_paths_agree_on_seeded_structures() {
    let models: Vec<AInftyAlgebra> = ["x^3", "x^4", "x^3+y^3", "x^2*y+y^4"]
        .iter()
        .map(|t| {
            let (w, vars) = parse_poly_infer(t).unwrap();
            minimal_model(&w, &vars, None, 5).unwrap().algebra
        })
        .collect();
    let spaces = [
        SuperSpace::from_pairs(&[("a", 0), ("b", 1)]),
        SuperSpace::from_pairs(&[("a", 0), ("b", 0), ("c", 1)]),
    ];
    let (mut passing, mut failing_late) = (0, 0);
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let a = match seed % 4 {
            0 | 1 => {
                let sp = &spaces[(seed / 4 % 2) as usize];
                sample::structure(&mut r, sp, 5, 0.08)
            }
            _ => {
                let base = &models[(seed / 4 % 4) as usize];
                let (g, inv) = random_gauge(base.space(), &mut r);
                let mut a = transport(base, &g, &inv);
                if seed % 4 == 3 {
                    // knock one entry of a higher product
                    let k = r.gen_range(3..=5);
                    let t: Vec<usize> = (0..k).map(|_| r.gen_range(0..a.dim())).collect();
                    let p = (a.space().tuple_parity(&t) + k as u8) & 1;
                    let outs: Vec<usize> = (0..a.dim()).filter(|&o| a.space().parity(o) == p).collect();
                    let o = outs[r.gen_range(0..outs.len())];
                    a.add_entry(t, o, q(1)).unwrap();
                }
                a
            }
        };
        let (same, passed) = agree(&a, 5);
        assert!(same, "seed {seed}");
        if passed {
            passing += 1;
        } else if check_ainfty(&a, 5).first_violation.unwrap().arity > 2 {
            failing_late += 1;
        }
    }
    assert!(passing >= 50, "{passing} passing structures");
    assert!(failing_late >= 20, "{failing_late} late violations");
}

#[test]
fn transported_models_stay_valid() {
    let (w, vars) = parse_poly_infer("x^3+y^3").unwrap();
    let a = minimal_model(&w, &vars, None, 5).unwrap().algebra;
    let (g, inv) = random_gauge(a.space(), &mut rng(1));
    let b = transport(&a, &g, &inv);
    assert!(check_ainfty(&b, 5).passed);
    let back = transport(&b, &inv, &g);
    for (k, m) in a.products() {
        assert_eq!(back.product(k).unwrap().entries(), m.entries());
    }
}
