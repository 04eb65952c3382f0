use mfhh_core::ainfty::{bracket_relation, check_ainfty, load_algebra_str, AInftyAlgebra};
use mfhh_core::exactpoly::{parse_poly, parse_poly_infer, JetPolynomial};
use mfhh_core::hochschild::{gerstenhaber, TruncatedComplex};
use mfhh_core::linalg::{axpy, SparseVec};
use mfhh_core::matfact::*;
use mfhh_core::rational::q;
use mfhh_core::sample::rng;
use mfhh_core::superlin::SuperSpace;
use mfhh_core::{Error, Rational};
use num_traits::{One, Zero};
use rand::Rng;

mod support;
use support::tree_oracle;

fn poly(text: &str, vars: &[&str], order: u32) -> JetPolynomial {
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    parse_poly(text, &names).unwrap().with_order(order)
}

fn koszul(text: &str, order: u32) -> MatrixFactorization {
    let (w, vars) = parse_poly_infer(text).unwrap();
    koszul_mf(&w.with_order(order), &vars, order).unwrap()
}

fn render(m: &PolyMatrix, vars: &[&str]) -> Vec<Vec<String>> {
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    m.iter()
        .map(|r| r.iter().map(|p| p.render(&names)).collect())
        .collect()
}

#[test]
fn koszul_one_variable_blocks() {
    let e = koszul("x^2", 6);
    assert_eq!(render(e.delta1(), &["x"]), vec![vec!["x"]]);
    assert_eq!(render(e.delta0(), &["x"]), vec![vec!["x"]]);
    let e = koszul("x^3", 6);
    assert_eq!(render(e.delta1(), &["x"]), vec![vec!["x"]]);
    assert_eq!(render(e.delta0(), &["x"]), vec![vec!["x^2"]]);
}

#[test]
fn koszul_two_variable_blocks_square_to_w() {
    let order = 5;
    let e = koszul("x^2+y^2", order);
    assert_eq!((e.rank0(), e.rank1()), (2, 2));
    for row in e.delta1().iter().chain(e.delta0()) {
        for p in row {
            let r = p.render(&["x".into(), "y".into()]);
            assert!(["0", "x", "-x", "y", "-y"].contains(&r.as_str()), "{r}");
        }
    }
    // independent dense product over jets
    let w = poly("x^2+y^2", &["x", "y"], order);
    for (a, b) in [(e.delta1(), e.delta0()), (e.delta0(), e.delta1())] {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = JetPolynomial::zero(2, order);
                for k in 0..2 {
                    acc = &acc + &(&a[i][k] * &b[k][j]);
                }
                let want = if i == j { w.clone() } else { JetPolynomial::zero(2, order) };
                assert_eq!(acc, want);
            }
        }
    }
}

#[test]
fn koszul_squares_to_w_on_corpus() {
    for text in [
        "x^2", "x^3", "x^7", "x^2+y^2", "x^3+y^3", "x^2*y+y^4", "x^5+x^2*y^2+y^5",
        "x^3+x*y^3", "x^2+y^2+z^2", "x^3+y^3+z^3", "x*y*z", "x^2*y+y^2*z+z^3",
        "x^4+y^4+z^4+x*y*z",
    ] {
        let e = koszul(text, 8);
        assert_eq!(e.rank0(), e.rank1(), "{text}");
    }
}

#[test]
fn koszul_rejects_linear_terms() {
    let (w, vars) = parse_poly_infer("x+y^2").unwrap();
    assert!(matches!(koszul_mf(&w, &vars, 4), Err(Error::Precondition(_))));
}

#[test]
fn loader_round_trip_and_rejection() {
    let e = koszul("x^3+y^3", 6);
    let text = save_mf_string(&e, Some("koszul factorization"));
    assert_eq!(load_mf_str(&text, 6).unwrap(), e);

    let bad = r#"{"vars": ["x"], "potential": "x^3", "delta1": [["x"]], "delta0": [["x"]]}"#;
    assert!(matches!(load_mf_str(bad, 6), Err(Error::Invariant(_))));
    let good = r#"{"vars": ["x"], "potential": "x^3", "delta1": [["x^2"]], "delta0": [["x"]]}"#;
    assert!(load_mf_str(good, 6).is_ok());
    let schema = r#"{"vars": ["x"], "potential": "x^3", "delta1": [["x^2"]]}"#;
    assert!(matches!(load_mf_str(schema, 6), Err(Error::Schema(_))));
}

#[test]
fn hom_complex_dimensions_and_identity() {
    let order = 4;
    let e = koszul("x^2", order);
    let hom = HomComplex::new(&e, &e).unwrap();
    let even = (0..hom.dim()).filter(|&k| hom.parity(k) == 0).count();
    let odd = hom.dim() - even;
    // two matrix slots of each parity, each a copy of the jet ring
    assert_eq!((even, odd), (2 * (order as usize + 1), 2 * (order as usize + 1)));

    for text in ["x^2", "x^3", "x^2+y^2", "x^3+y^3"] {
        let e = koszul(text, 5);
        let dga = endo_dga(&e).unwrap();
        let id = dga.unit();
        assert!(dga.d(&id).is_empty(), "{text}");
        let split = dga.splitting(dga.order());
        let p = split.project(&dga, &id);
        assert!(!p.is_empty(), "identity is not a coboundary for {text}");
    }
}

#[test]
fn hom_complex_rejects_mismatched_potentials() {
    let a = koszul("x^2", 4);
    let b = koszul("x^3", 4);
    assert!(matches!(HomComplex::new(&a, &b), Err(Error::PotentialMismatch)));
}

fn random_element(dga: &EndDga, r: &mut impl Rng, parity: Option<u8>) -> SparseVec {
    let mut v = SparseVec::new();
    for _ in 0..6 {
        let k = r.gen_range(0..dga.dim());
        if parity.is_some_and(|p| dga.hom().parity(k) != p) {
            continue;
        }
        axpy(&mut v, &q(r.gen_range(-3..=3)), &[(k, Rational::one())].into());
    }
    v
}

#[test]
fn endomorphism_dga_identities() {
    let mut r = rng(11);
    for text in ["x^3", "x^2+y^2", "x^2*y+y^4", "x^3+y^3+z^3"] {
        let order = if text.contains('z') { 4 } else { 6 };
        let dga = endo_dga(&koszul(text, order)).unwrap();
        for k in 0..dga.dim() {
            let e: SparseVec = [(k, Rational::one())].into();
            assert!(dga.d(&dga.d(&e)).is_empty(), "d^2 on {text}");
        }
        for _ in 0..40 {
            let pa = r.gen_range(0..2u8);
            let a = random_element(&dga, &mut r, Some(pa));
            let b = random_element(&dga, &mut r, None);
            let c = random_element(&dga, &mut r, None);
            assert_eq!(dga.mul(&dga.mul(&a, &b), &c), dga.mul(&a, &dga.mul(&b, &c)));
            let mut rhs = dga.mul(&dga.d(&a), &b);
            let s = if pa == 0 { Rational::one() } else { -Rational::one() };
            axpy(&mut rhs, &s, &dga.mul(&a, &dga.d(&b)));
            assert_eq!(dga.d(&dga.mul(&a, &b)), rhs, "Leibniz on {text}");
        }
    }
}

#[test]
fn cohomology_of_zero_potential_is_exterior() {
    for (n, vars) in [(1, vec!["x".to_string()]), (2, vec!["x".into(), "y".into()])] {
        let w = JetPolynomial::zero(n, 6);
        let mf = koszul_mf(&w, &vars, 6).unwrap();
        let report = endo_report(&mf).unwrap();
        assert_eq!(report.dimension, 1 << n);
        assert!(report.stable);
    }
}

#[test]
fn cohomology_dimension_on_corpus() {
    for text in [
        "x^2", "x^3", "x^4", "x^6", "x^2+y^2", "x^3+y^3", "x^2*y+y^4", "x^3+x*y^3",
        "x^4+y^5", "x^5+x^2*y^2+y^5",
    ] {
        let (w, vars) = parse_poly_infer(text).unwrap();
        let report = stable_endo_report(&w, &vars, None, 16).unwrap();
        let n = vars.len();
        assert_eq!(report.dimension, 1 << n, "{text}: {report:?}");
        assert_eq!((report.even, report.odd), (1 << (n - 1), 1 << (n - 1)), "{text}");
        assert!(report.stable, "{text}");
        assert!(report.full_dimension > report.dimension, "truncation artifacts expected");
    }
}

fn odd_square(text: &str) -> SparseVec {
    let (w, _) = parse_poly_infer(text).unwrap();
    let order = default_mf_order(&w);
    let dga = endo_dga(&koszul(text, order)).unwrap();
    let split = dga.splitting(good_threshold(&w, order));
    assert_eq!(split.good_dimension(), 2);
    let xi = &split.representatives()[1];
    assert_eq!(dga.parity(xi), Some(1));
    split.project(&dga, &dga.mul(xi, xi))
}

#[test]
fn clifford_and_exterior_relations() {
    let sq = odd_square("x^2");
    assert_eq!(sq.len(), 1);
    let (cls, c) = sq.iter().next().unwrap();
    assert_eq!(*cls, 0);
    assert!(!c.is_zero());
    assert!(odd_square("x^3").is_empty());
}

#[test]
fn splitting_side_conditions() {
    for text in ["x^3", "x^2+y^2"] {
        let (w, _) = parse_poly_infer(text).unwrap();
        let dga = endo_dga(&koszul(text, 5)).unwrap();
        let split = dga.splitting(good_threshold(&w, 5));
        for (i, rep) in split.representatives().iter().enumerate() {
            let pi = split.project(&dga, rep);
            assert_eq!(pi, [(i, Rational::one())].into(), "p i = id");
            assert!(split.homotopy(&dga, rep).is_empty(), "h i = 0");
        }
        for k in 0..dga.dim() {
            let e: SparseVec = [(k, Rational::one())].into();
            let h = split.homotopy(&dga, &e);
            assert!(split.homotopy(&dga, &h).is_empty(), "h^2 = 0");
            assert!(split.project(&dga, &h).is_empty(), "p h = 0");
            let mut lhs = dga.d(&h);
            axpy(&mut lhs, &Rational::one(), &split.homotopy(&dga, &dga.d(&e)));
            let mut rhs = e.clone();
            axpy(&mut rhs, &-Rational::one(), &split.include(&split.project(&dga, &e)));
            assert_eq!(lhs, rhs, "dh + hd = 1 - ip");
        }
    }
}

fn assert_matches_oracle(text: &str, k_max: usize) -> AInftyAlgebra {
    let (a, oracle) = tree_oracle(text, k_max);
    for (k, entries) in oracle.iter().enumerate().skip(2) {
        let mine = a.product(k);
        let count = mine.map_or(0, |m| m.entries().len());
        assert_eq!(count, entries.len(), "{text}: support of m{k}");
        for (t, v) in entries {
            assert_eq!(mine.and_then(|m| m.get(t)), Some(v), "{text}: m{k}{t:?}");
        }
    }
    assert!(a.product(1).is_none(), "m1 = 0");
    assert!(check_ainfty(&a, k_max).passed);
    assert!(bracket_relation(&a, k_max).passed);
    a
}

#[test]
fn transfer_one_variable_family() {
    let a = assert_matches_oracle("x^2", 4);
    assert_eq!(a.k_max(), 2);
    let sq = a.product(2).unwrap().get(&[1, 1]).unwrap();
    assert_eq!(sq.keys().copied().collect::<Vec<_>>(), vec![0]);

    for n in 2..=3usize {
        let text = format!("x^{}", n + 1);
        let a = assert_matches_oracle(&text, 5);
        let higher: Vec<usize> = a.products().map(|(k, _)| k).filter(|&k| k > 2).collect();
        assert_eq!(higher, vec![n + 1], "{text}");
        let m = a.product(n + 1).unwrap();
        assert_eq!(m.entries().len(), 1);
        let v = m.get(&vec![1; n + 1]).unwrap();
        assert_eq!(v.keys().copied().collect::<Vec<_>>(), vec![0]);
    }
}

#[test]
fn gauge_scalars_match_fixture() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/transfer_scalars.json"
    ))
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for entry in v["potentials"].as_array().unwrap() {
        let w = entry["potential"].as_str().unwrap();
        let k = entry["arity"].as_u64().unwrap() as usize;
        let (p, vars) = parse_poly_infer(w).unwrap();
        let model = minimal_model(&p, &vars, None, k.max(3)).unwrap();
        let m = model.algebra.product(k).unwrap();
        let got = m.get(&vec![1; k]).unwrap()[&0].clone();
        let want = mfhh_core::rational::parse_rational(entry["scalar"].as_str().unwrap()).unwrap();
        assert_eq!(got, want, "{w}");
    }
}

#[test]
fn transfer_two_variables_against_oracle() {
    let a = assert_matches_oracle("x^3+y^3", 5);
    // the x-generator alone reproduces the one-variable model
    let one = minimal_model(&parse_poly_infer("x^3").unwrap().0, &["x".into()], None, 5).unwrap();
    let x_gen = 1;
    for k in 2..=5 {
        let mine = a.product(k).and_then(|m| m.get(&vec![x_gen; k]).cloned());
        let theirs = one.algebra.product(k).and_then(|m| m.get(&vec![1; k]).cloned());
        // rescaling the representative by -1 flips odd arities
        assert_eq!(mine.is_some(), theirs.is_some(), "arity {k}");
        if let (Some(u), Some(v)) = (mine, theirs) {
            assert_eq!(u.keys().collect::<Vec<_>>(), v.keys().collect::<Vec<_>>());
            assert_eq!(u[&0].clone() * u[&0].clone(), v[&0].clone() * v[&0].clone(), "arity {k}");
        }
    }
    assert_matches_oracle("x^2*y+y^4", 4);
}

#[test]
fn transfer_at_arity_six_satisfies_relations() {
    let (w, vars) = parse_poly_infer("x^3+y^3").unwrap();
    let m = minimal_model(&w, &vars, None, 6).unwrap();
    assert!(check_ainfty(&m.algebra, 6).passed);
    assert!(bracket_relation(&m.algebra, 6).passed);
}

#[test]
fn m2_is_the_cohomology_product() {
    for text in ["x^3", "x^2+y^2", "x^2*y+y^4"] {
        let (w, vars) = parse_poly_infer(text).unwrap();
        let order = default_mf_order(&w);
        let dga = endo_dga(&koszul_mf(&w.with_order(order), &vars, order).unwrap()).unwrap();
        let split = dga.splitting(good_threshold(&w, order));
        let model = transfer(&dga, &split, 3).unwrap();
        let g = split.good_dimension();
        let m2 = model.algebra.product(2).unwrap();
        for a in 0..g {
            for b in 0..g {
                let reps = split.representatives();
                let want = split.project(&dga, &dga.mul(&reps[a], &reps[b]));
                let got = m2.get(&[a, b]).cloned().unwrap_or_default();
                assert_eq!(got, want, "{text}: m2({a},{b})");
            }
        }
    }
}

fn fingerprint(a: &AInftyAlgebra) -> (usize, usize, Option<usize>) {
    let odd = (0..a.dim()).filter(|&i| a.space().parity(i) == 1).count();
    (a.dim(), odd, a.products().map(|(k, _)| k).find(|&k| k > 2))
}

#[test]
fn fingerprint_is_splitting_independent() {
    for text in ["x^4", "x^3+y^3", "x^2*y+y^4"] {
        let (w, vars) = parse_poly_infer(text).unwrap();
        let base = default_mf_order(&w);
        let a = minimal_model(&w, &vars, Some(base), 5).unwrap();
        let b = minimal_model(&w, &vars, Some(base + 2), 5).unwrap();
        assert_eq!(fingerprint(&a.algebra), fingerprint(&b.algebra), "{text}");
    }
}

#[test]
fn compare_decides_quasi_homogeneous_cases() {
    for text in ["x^2", "x^3", "x^3+y^3", "x^2*y+y^4", "x^4+y^5"] {
        let (w, vars) = parse_poly_infer(text).unwrap();
        let model = minimal_model(&w, &vars, None, default_compare_arity(vars.len())).unwrap();
        let report = compare_m_w(&w, &model).unwrap();
        assert_eq!(report.verdict, Verdict::ClassZero, "{text}");
        assert_eq!(report.agrees, Some(true));
        // the witness really bounds: {b, γ} = b in the window
        let gamma = report.witness.unwrap();
        let cx = TruncatedComplex::new(&model.algebra, report.window);
        let (lhs, _) = gerstenhaber(cx.structure(), &gamma, report.window);
        assert!(lhs.sub(&cx.structure().truncate(report.window)).is_zero(), "{text}");
    }
}

#[test]
fn compare_quadric_is_a_one_step_solve() {
    let (w, vars) = parse_poly_infer("x^2").unwrap();
    let model = minimal_model(&w, &vars, None, 3).unwrap();
    let report = compare_m_w(&w, &model).unwrap();
    assert_eq!(report.verdict, Verdict::ClassZero);
    let gamma = report.witness.unwrap();
    assert!(gamma.max_arity().unwrap() <= 1);
}

#[test]
fn compare_certifies_non_quasi_homogeneous_case() {
    let (w, vars) = parse_poly_infer("x^5+x^2*y^2+y^5").unwrap();
    let model = minimal_model(&w, &vars, None, 6).unwrap();
    let report = compare_m_w(&w, &model).unwrap();
    assert!(!report.quasi_homogeneous);
    assert_eq!(report.verdict, Verdict::ClassNonzero);
    assert_eq!(report.agrees, Some(true));
}

#[test]
fn class_zero_below_the_degree_of_w_is_not_a_decision() {
    let (w, vars) = parse_poly_infer("x^5+x^2*y^2+y^6").unwrap();
    let early = compare_m_w(&w, &minimal_model(&w, &vars, None, 6).unwrap()).unwrap();
    assert_eq!(early.verdict, Verdict::ClassZero);
    assert!(!early.window_suffices);
    assert_eq!(early.agrees, None);
    assert_eq!(compare_arity(&w), 7);
    let late = compare_m_w(&w, &minimal_model(&w, &vars, None, 7).unwrap()).unwrap();
    assert_eq!(late.verdict, Verdict::ClassNonzero);
    assert_eq!(late.agrees, Some(true));
}

#[test]
fn degree_correspondence_for_one_variable() {
    for d in 2..=4u32 {
        let text = format!("x^{d}");
        let (w, vars) = parse_poly_infer(&text).unwrap();
        let model = minimal_model(&w, &vars, None, 5).unwrap();
        let dc = compare_m_w(&w, &model).unwrap().degree_correspondence.unwrap();
        assert!(dc.matches, "{text}: {dc:?}");
        assert_eq!(dc.degree, d);
        if d > 2 {
            assert_eq!(dc.first_higher_arity, Some(d as usize));
        }
    }
}

#[test]
fn pagoda_fixture_comes_from_the_pipeline() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/pagoda_n2.json"
    ))
    .unwrap();
    let loaded = load_algebra_str(&text).unwrap();
    assert_eq!(loaded.algebra.k_max(), 4);
    let (w, vars) = parse_poly_infer("x^4").unwrap();
    let model = minimal_model(&w, &vars, None, 6).unwrap();
    let a = &loaded.algebra;
    for k in 2..=6 {
        let mine = model.algebra.product(k).map(|m| m.entries().clone());
        let theirs = a.product(k).map(|m| m.entries().clone());
        assert_eq!(mine, theirs, "m{k}");
    }
}

#[test]
fn window_is_reported_when_too_large() {
    let (w, _) = parse_poly_infer("x^2+y^2+z^2+u^2").unwrap();
    let names: Vec<(String, u8)> = (0..16).map(|i| (format!("g{i}"), (i % 2) as u8)).collect();
    let algebra = AInftyAlgebra::new(SuperSpace::new(names).unwrap(), None).unwrap();
    let model = MinimalModel {
        algebra,
        k_max: 6,
        order: 3,
        threshold: 2,
        full_dimension: 16,
        representatives: Vec::new(),
    };
    let report = compare_m_w(&w, &model).unwrap();
    assert_eq!(report.verdict, Verdict::WindowLimited);
    assert!(report.reason.is_some());
    assert_eq!(default_compare_arity(4), 3);
    assert_eq!(default_compare_arity(2), 6);
    let (w, _) = parse_poly_infer("x^3+y^7+x*y^5").unwrap();
    assert_eq!(compare_arity(&w), 7);
}
