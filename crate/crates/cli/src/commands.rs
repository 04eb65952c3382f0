use std::path::{Path, PathBuf};

use mfhh_core::ainfty::{self, AInftyAlgebra};
use mfhh_core::exactpoly::{
    is_quasi_homogeneous, milnor_algebra, normal_form, parse_poly, parse_poly_infer,
    tjurina_algebra, verify_euler_witness, JetPolynomial, QuotientPresentation,
    DEFAULT_ORDER_CAP,
};
use mfhh_core::hochschild::{save_cochain_string, structure_cochain};
use mfhh_core::matfact::{self, MatrixFactorization, Verdict};
use mfhh_core::morita::{self, AInftyBimodule, TriangularAlgebra};
use mfhh_core::{sample, Error, Result};
use serde_json::{json, Value};

use crate::report::{Report, EXIT_INVARIANT, EXIT_UNSTABLE};
use crate::{Cli, Command, Common};

/// How far the endomorphism search may raise the jet order past its start.
const ENDO_ORDER_SLACK: u32 = 8;
const DEFAULT_CHECK_ARITY: usize = 5;
const DEFAULT_TRIANGLE_WINDOW: usize = 3;
const PROBE_ARITY: usize = 3;
const PROBE_DENSITY: f64 = 0.2;

pub fn run(cli: &Cli) -> Report {
    let c = &cli.common;
    let mut r = Report::new(echo(cli));
    r.seed(c.seed);
    let out = match &cli.command {
        Command::Milnor => milnor(c, &mut r),
        Command::Tjurina => tjurina(c, &mut r),
        Command::Quasihom => quasihom(c, &mut r),
        Command::Fingerprint => fingerprint(c, &mut r),
        Command::Koszul { check } => koszul(c, *check, &mut r),
        Command::Endo => endo(c, &mut r),
        Command::Transfer => transfer(c, &mut r),
        Command::Compare => compare(c, &mut r),
        Command::AinftyCheck { perturbation } => ainfty_check(c, perturbation.as_deref(), &mut r),
        Command::Glue { left, right } => glue(c, left.as_deref(), right.as_deref(), &mut r),
        Command::Triangle { left, right } => triangle(c, left.as_deref(), right.as_deref(), &mut r),
    };
    if let Err(e) = out {
        if let Error::Unstable(n) = e {
            r.jet_order(n);
        }
        r.error(&e);
    }
    r
}

fn echo(cli: &Cli) -> Value {
    let c = &cli.common;
    let name = match &cli.command {
        Command::Milnor => "milnor",
        Command::Tjurina => "tjurina",
        Command::Quasihom => "quasihom",
        Command::Fingerprint => "fingerprint",
        Command::Koszul { .. } => "koszul",
        Command::Endo => "endo",
        Command::Transfer => "transfer",
        Command::Compare => "compare",
        Command::AinftyCheck { .. } => "ainfty-check",
        Command::Glue { .. } => "glue",
        Command::Triangle { .. } => "triangle",
    };
    let mut args = serde_json::Map::new();
    if !c.expr.is_empty() {
        args.insert("expr".into(), json!(c.expr));
    }
    if !c.file.is_empty() {
        let files: Vec<String> = c.file.iter().map(|p| p.display().to_string()).collect();
        args.insert("file".into(), json!(files));
    }
    if let Some(v) = &c.vars {
        args.insert("vars".into(), json!(v));
    }
    if let Some(n) = c.trunc {
        args.insert("trunc".into(), json!(n));
    }
    if let Some(k) = c.max_arity {
        args.insert("max_arity".into(), json!(k));
    }
    match &cli.command {
        Command::Koszul { check: true } => {
            args.insert("check".into(), json!(true));
        }
        Command::AinftyCheck { perturbation: Some(p) } => {
            args.insert("perturbation".into(), json!(p.display().to_string()));
        }
        Command::Glue { left, right } | Command::Triangle { left, right } => {
            if let Some(p) = left {
                args.insert("left".into(), json!(p.display().to_string()));
            }
            if let Some(p) = right {
                args.insert("right".into(), json!(p.display().to_string()));
            }
        }
        _ => {}
    }
    json!({ "name": name, "args": args })
}

fn resolve(c: &Common, p: &Path) -> PathBuf {
    match &c.fixtures {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn read(c: &Common, p: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(resolve(c, p))?)
}

/// The `i`-th input text: expressions first, then files.
fn input_text(c: &Common, i: usize) -> Result<String> {
    if let Some(e) = c.expr.get(i) {
        return Ok(e.clone());
    }
    match c.file.get(i - c.expr.len()) {
        Some(p) => read(c, p),
        None => Err(Error::Precondition(format!(
            "missing input #{}: pass --expr or --file",
            i + 1
        ))),
    }
}

fn parse(c: &Common, text: &str) -> Result<(JetPolynomial, Vec<String>)> {
    match &c.vars {
        Some(v) => Ok((parse_poly(text.trim(), v)?, v.clone())),
        None => parse_poly_infer(text.trim()),
    }
}

fn potential(c: &Common, i: usize) -> Result<(JetPolynomial, Vec<String>)> {
    parse(c, &input_text(c, i)?)
}

fn render_basis(p: &QuotientPresentation, vars: &[String]) -> Vec<String> {
    p.basis().iter().map(|m| m.render(vars)).collect()
}

fn milnor_at(c: &Common, w: &JetPolynomial) -> Result<QuotientPresentation> {
    match c.trunc {
        Some(n) => milnor_algebra(w, Some(n), n),
        None => milnor_algebra(w, None, DEFAULT_ORDER_CAP),
    }
}

fn tjurina_at(c: &Common, w: &JetPolynomial) -> Result<QuotientPresentation> {
    match c.trunc {
        Some(n) => tjurina_algebra(w, Some(n), n),
        None => tjurina_algebra(w, None, DEFAULT_ORDER_CAP),
    }
}

fn describe(r: &mut Report, w: &JetPolynomial, vars: &[String]) {
    r.set("potential", w.render(vars)).set("vars", json!(vars));
}

fn milnor(c: &Common, r: &mut Report) -> Result<()> {
    let (w, vars) = potential(c, 0)?;
    describe(r, &w, &vars);
    let m = milnor_at(c, &w)?;
    let residue = normal_form(&w, &m)?;
    r.jet_order(m.order())
        .set("mu", m.basis().len())
        .set("basis", render_basis(&m, &vars))
        .set("hilbert_function", json!(m.hilbert_function()))
        .set("residue", residue.render(&vars))
        .set("quasi_homogeneous", residue.is_zero())
        .flag("stable", true);
    Ok(())
}

fn tjurina(c: &Common, r: &mut Report) -> Result<()> {
    let (w, vars) = potential(c, 0)?;
    describe(r, &w, &vars);
    let m = milnor_at(c, &w)?;
    let t = tjurina_at(c, &w)?;
    r.jet_order(t.order().max(m.order()))
        .set("tau", t.basis().len())
        .set("mu", m.basis().len())
        .set("tau_equals_mu", t.basis().len() == m.basis().len())
        .set("basis", render_basis(&t, &vars))
        .set("hilbert_function", json!(t.hilbert_function()))
        .flag("stable", true);
    Ok(())
}

fn quasihom(c: &Common, r: &mut Report) -> Result<()> {
    let (w, vars) = potential(c, 0)?;
    describe(r, &w, &vars);
    let m = milnor_at(c, &w)?;
    let qh = is_quasi_homogeneous(&w, &m)?;
    r.jet_order(qh.order)
        .set("quasi_homogeneous", qh.quasi_homogeneous)
        .set("residue", qh.residue.render(&vars));
    if let Some(gamma) = &qh.witness {
        let ok = verify_euler_witness(&w, gamma, qh.order);
        let rendered: Vec<String> = gamma.iter().map(|g| g.render(&vars)).collect();
        r.set("witness", json!(rendered)).set("witness_verified", ok);
        if !ok {
            r.fail(EXIT_INVARIANT);
        }
    }
    r.flag("stable", true);
    Ok(())
}

fn fingerprint(c: &Common, r: &mut Report) -> Result<()> {
    let mut rows = Vec::new();
    let mut order = 0;
    for i in 0..2 {
        let (w, vars) = potential(c, i)?;
        let m = milnor_at(c, &w)?;
        let t = tjurina_at(c, &w)?;
        order = order.max(m.order()).max(t.order());
        rows.push((w.render(&vars), m.basis().len(), t.basis().len(), t.hilbert_function()));
    }
    let (a, b) = (&rows[0], &rows[1]);
    let mut differing = Vec::new();
    if a.1 != b.1 {
        differing.push("mu");
    }
    if a.2 != b.2 {
        differing.push("tau");
    }
    if a.3 != b.3 {
        differing.push("tjurina_hilbert_function");
    }
    let verdict = if differing.is_empty() {
        "not distinguished at this level"
    } else {
        "distinguished"
    };
    let side = |x: &(String, usize, usize, Vec<usize>)| {
        json!({ "potential": x.0, "mu": x.1, "tau": x.2, "tjurina_hilbert_function": x.3 })
    };
    r.jet_order(order)
        .set("first", side(a))
        .set("second", side(b))
        .set("differing", json!(differing))
        .set("verdict", verdict)
        .flag("stable", true);
    Ok(())
}

fn product(a: &[Vec<JetPolynomial>], b: &[Vec<JetPolynomial>], zero: &JetPolynomial) -> Vec<Vec<JetPolynomial>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(zero.clone(), |acc, (x, brow)| &acc + &(x * &brow[j]))
                })
                .collect()
        })
        .collect()
}

fn is_w_identity(m: &[Vec<JetPolynomial>], w: &JetPolynomial) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, x)| {
            if i == j {
                (x - w).is_zero()
            } else {
                x.is_zero()
            }
        })
    })
}

fn load_factorization(c: &Common, text: &str) -> Result<MatrixFactorization> {
    let raw: Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let order = match c.trunc {
        Some(n) => n,
        None => {
            let vars: Vec<String> = serde_json::from_value(raw["vars"].clone())
                .map_err(|e| Error::Schema(format!("vars: {e}")))?;
            let w = raw["potential"]
                .as_str()
                .ok_or_else(|| Error::Schema("potential must be a string".into()))?;
            matfact::default_mf_order(&parse_poly(w, &vars)?)
        }
    };
    matfact::load_mf_str(text, order)
}

fn koszul(c: &Common, check: bool, r: &mut Report) -> Result<()> {
    let text = input_text(c, 0)?;
    let mf = if text.trim_start().starts_with('{') {
        load_factorization(c, &text)?
    } else {
        let (w, vars) = parse(c, &text)?;
        let n = c.trunc.unwrap_or_else(|| matfact::default_mf_order(&w));
        matfact::koszul_mf(&w.with_order(n), &vars, n)?
    };
    let vars = mf.vars().to_vec();
    let (d1, d0) = mf.render();
    describe(r, mf.potential(), &vars);
    r.jet_order(mf.order())
        .set("rank0", mf.rank0())
        .set("rank1", mf.rank1())
        .set("delta1", json!(d1))
        .set("delta0", json!(d0));
    if check {
        let zero = JetPolynomial::zero(mf.nvars(), mf.order());
        let w = mf.potential().with_order(mf.order());
        let ok10 = is_w_identity(&product(mf.delta1(), mf.delta0(), &zero), &w);
        let ok01 = is_w_identity(&product(mf.delta0(), mf.delta1(), &zero), &w);
        r.set("delta_squared_is_w", ok10 && ok01);
        if !(ok10 && ok01) {
            r.fail(EXIT_INVARIANT);
        }
    }
    Ok(())
}

fn endo(c: &Common, r: &mut Report) -> Result<()> {
    let (w, vars) = potential(c, 0)?;
    describe(r, &w, &vars);
    let rep = match c.trunc {
        Some(n) => matfact::endo_report(&matfact::koszul_mf(&w.with_order(n), &vars, n)?)?,
        None => {
            let start = matfact::default_mf_order(&w);
            matfact::stable_endo_report(&w, &vars, Some(start), start + ENDO_ORDER_SLACK)?
        }
    };
    r.jet_order(rep.order)
        .set("endo", serde_json::to_value(&rep).expect("serializable"))
        .set("expected_dimension", 1usize << vars.len())
        .flag("stable", rep.stable)
        .flag(
            "stability_note",
            "heuristic: the class count agrees with the count one jet order lower",
        );
    if !rep.stable {
        r.fail(EXIT_UNSTABLE);
    }
    Ok(())
}

fn model(c: &Common, r: &mut Report) -> Result<(JetPolynomial, matfact::MinimalModel)> {
    let (w, vars) = potential(c, 0)?;
    describe(r, &w, &vars);
    let k = c.max_arity.unwrap_or_else(|| matfact::compare_arity(&w));
    r.arity_window(k);
    let m = matfact::minimal_model(&w, &vars, c.trunc, k)?;
    r.jet_order(m.order)
        .set("threshold", m.threshold)
        .set("full_dimension", m.full_dimension)
        .set("dimension", m.algebra.dim());
    Ok((w, m))
}

fn algebra_value(a: &AInftyAlgebra, note: Option<&str>) -> Value {
    serde_json::from_str(&ainfty::save_algebra_string(a, note)).expect("valid json")
}

fn write_out(c: &Common, text: &str) -> Result<()> {
    if let Some(p) = &c.out {
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn transfer(c: &Common, r: &mut Report) -> Result<()> {
    let (_, m) = model(c, r)?;
    let nonzero: Vec<usize> = m
        .algebra
        .products()
        .filter(|(_, p)| !p.entries().is_empty())
        .map(|(k, _)| k)
        .collect();
    let rel = ainfty::check_ainfty(&m.algebra, m.k_max);
    if !rel.passed {
        r.fail(EXIT_INVARIANT);
    }
    write_out(c, &ainfty::save_algebra_string(&m.algebra, None))?;
    r.set("nonzero_arities", json!(nonzero))
        .set("model", algebra_value(&m.algebra, None))
        .set("relations", serde_json::to_value(&rel).expect("serializable"));
    Ok(())
}

fn compare(c: &Common, r: &mut Report) -> Result<()> {
    let (w, m) = model(c, r)?;
    let rep = matfact::compare_m_w(&w, &m)?;
    let witness = rep
        .witness
        .as_ref()
        .map(|g| serde_json::from_str::<Value>(&save_cochain_string(g, rep.window, None)).expect("valid json"));
    r.set("compare", serde_json::to_value(&rep).expect("serializable"))
        .set("witness", witness.unwrap_or(Value::Null))
        .flag("window_limited", rep.verdict == Verdict::WindowLimited);
    if rep.verdict == Verdict::WindowLimited {
        r.fail(EXIT_UNSTABLE);
    }
    Ok(())
}

fn ainfty_check(c: &Common, perturbation: Option<&Path>, r: &mut Report) -> Result<()> {
    let n = c.max_arity.unwrap_or(DEFAULT_CHECK_ARITY);
    r.arity_window(n);
    let (a, pert) = match c.file.first() {
        Some(p) => {
            let loaded = ainfty::load_algebra_str(&read(c, p)?)?;
            r.set("warnings", json!(loaded.warnings));
            let pert = match perturbation {
                Some(q) => Some(ainfty::load_algebra_str(&read(c, q)?)?.algebra),
                None => None,
            };
            (loaded.algebra, pert)
        }
        None => {
            let algebras = sample::small_algebras();
            let (name, a) = algebras[(c.seed % algebras.len() as u64) as usize].clone();
            let mut rng = sample::rng(c.seed);
            let p = sample::structure(&mut rng, a.space(), PROBE_ARITY, PROBE_DENSITY);
            r.set("probe_algebra", name);
            (a, Some(p))
        }
    };
    r.set("dimension", a.dim());
    let rel = ainfty::check_ainfty(&a, n);
    let bracket = ainfty::bracket_relation(&a, n);
    let mut passed = rel.passed;
    r.set("relations", serde_json::to_value(&rel).expect("serializable"))
        .set("bracket_passed", bracket.passed)
        .set("paths_agree", rel.passed == bracket.passed);
    if let Some(p) = pert {
        let mc = ainfty::mc_check(&a, &p, n)?;
        passed &= mc.relations.passed;
        r.set("perturbation", algebra_value(&p, None))
            .set("maurer_cartan", serde_json::to_value(&mc).expect("serializable"));
    }
    r.set("passed", passed);
    if !passed {
        r.fail(EXIT_INVARIANT);
    }
    Ok(())
}

fn triangular(c: &Common, left: Option<&Path>, right: Option<&Path>) -> Result<TriangularAlgebra> {
    let (a, b, x) = match (left, right) {
        (Some(l), Some(rt)) => {
            let a = ainfty::load_algebra_str(&read(c, l)?)?.algebra;
            let b = ainfty::load_algebra_str(&read(c, rt)?)?.algebra;
            let x = AInftyBimodule::zero(&a, &b);
            (a, b, x)
        }
        (None, None) => {
            let p = c
                .file
                .first()
                .ok_or_else(|| Error::Precondition("pass a bimodule --file or --left and --right".into()))?;
            let (a, b, x) = morita::load_triple(&resolve(c, p))?;
            (a, b, x.bimodule)
        }
        _ => return Err(Error::Precondition("--left and --right go together".into())),
    };
    morita::glue(&a, &b, &x)
}

fn glue(c: &Common, left: Option<&Path>, right: Option<&Path>, r: &mut Report) -> Result<()> {
    let n = c.max_arity.unwrap_or(DEFAULT_CHECK_ARITY);
    r.arity_window(n);
    let tri = triangular(c, left, right)?;
    let ga = ainfty::check_ainfty(&tri.g, n);
    let bi = morita::check_bimodule(&tri, n);
    let g = structure_cochain(&tri.g);
    let restricts_a = morita::restrict_a(&tri, &g) == structure_cochain(&tri.a);
    let restricts_b = morita::restrict_b(&tri, &g) == structure_cochain(&tri.b);
    let passed = ga.passed && bi.passed && restricts_a && restricts_b;
    write_out(c, &ainfty::save_algebra_string(&tri.g, None))?;
    r.set("glued", algebra_value(&tri.g, None))
        .set("relations", serde_json::to_value(&ga).expect("serializable"))
        .set("bimodule", serde_json::to_value(&bi).expect("serializable"))
        .set("restricts_to_a", restricts_a)
        .set("restricts_to_b", restricts_b)
        .set("passed", passed);
    if !passed {
        r.fail(EXIT_INVARIANT);
    }
    Ok(())
}

fn triangle(c: &Common, left: Option<&Path>, right: Option<&Path>, r: &mut Report) -> Result<()> {
    let l = c.max_arity.unwrap_or(DEFAULT_TRIANGLE_WINDOW);
    r.arity_window(l);
    let tri = triangular(c, left, right)?;
    let rep = morita::triangle_check(&tri, l)?;
    r.set("dimension", tri.g.dim())
        .set("triangle", serde_json::to_value(&rep).expect("serializable"));
    if !rep.passed {
        r.fail(EXIT_INVARIANT);
    }
    Ok(())
}
