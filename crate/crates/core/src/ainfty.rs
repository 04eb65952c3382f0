//! Finite-dimensional ℤ/2-graded A∞-algebras.
//!
//! Products `m_k` are stored unshifted, with parity `k mod 2`. The relation
//! checked by [`check_ainfty`] is
//!
//! ```text
//! Σ_{r+s+t=n} (-1)^{r+st+s(|a_1|+..+|a_r|)} m_{r+1+t}(a_1..a_r, m_s(a_{r+1}..a_{r+s}), ..) = 0
//! ```
//!
//! where the last exponent is the Koszul sign of moving `m_s` past
//! `a_1..a_r`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hochschild::{self, Cochain};
use crate::linalg::{axpy, SparseVec};
use crate::rational::{format_rational, parse_rational, sign, Rational};
use crate::superlin::{Parity, SuperMap, SuperSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AInftyAlgebra {
    space: SuperSpace,
    products: BTreeMap<usize, SuperMap>,
    unit: Option<usize>,
}

impl AInftyAlgebra {
    pub fn new(space: SuperSpace, unit: Option<usize>) -> Result<Self> {
        if let Some(u) = unit {
            if u >= space.dim() || space.parity(u) != 0 {
                return Err(Error::Parity("unit must be an even basis element".into()));
            }
        }
        Ok(AInftyAlgebra {
            space,
            products: BTreeMap::new(),
            unit,
        })
    }

    pub fn space(&self) -> &SuperSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn unit(&self) -> Option<usize> {
        self.unit
    }

    pub fn product(&self, k: usize) -> Option<&SuperMap> {
        self.products.get(&k)
    }

    pub fn products(&self) -> impl Iterator<Item = (usize, &SuperMap)> {
        self.products.iter().map(|(k, m)| (*k, m))
    }

    /// Highest arity carrying a nonzero product (0 when there is none).
    pub fn k_max(&self) -> usize {
        self.products.keys().next_back().copied().unwrap_or(0)
    }

    /// Installs `m` as `m_k`, replacing any previous product of that arity.
    pub fn set_product(&mut self, m: SuperMap) -> Result<()> {
        let k = m.arity();
        if k == 0 {
            return Err(Error::Precondition("products have arity at least 1".into()));
        }
        if m.parity() != (k % 2) as Parity {
            return Err(Error::Parity(format!(
                "m_{k} must have parity {}, got {}",
                k % 2,
                m.parity()
            )));
        }
        if m.source() != &self.space || m.target() != &self.space {
            return Err(Error::Precondition(format!("m_{k} lives on a different space")));
        }
        if m.is_zero() {
            self.products.remove(&k);
        } else {
            self.products.insert(k, m);
        }
        Ok(())
    }

    /// Adds `c` to the coefficient of `output` in `m_k(inputs)`.
    pub fn add_entry(&mut self, inputs: Vec<usize>, output: usize, c: Rational) -> Result<()> {
        let k = inputs.len();
        let mut m = self.products.remove(&k).unwrap_or_else(|| {
            SuperMap::zero(k, self.space.clone(), self.space.clone(), (k % 2) as Parity)
        });
        let r = m.add_entry(inputs, output, c);
        if !m.is_zero() {
            self.products.insert(k, m);
        }
        r
    }

    /// The structure `m + m'`.
    pub fn perturbed(&self, other: &AInftyAlgebra) -> Result<AInftyAlgebra> {
        if other.space != self.space {
            return Err(Error::Precondition("perturbation lives on a different space".into()));
        }
        let mut out = self.clone();
        for (k, m) in &other.products {
            let mut sum = out.products.remove(k).unwrap_or_else(|| {
                SuperMap::zero(*k, self.space.clone(), self.space.clone(), m.parity())
            });
            sum.add_scaled(&Rational::from_integer(1.into()), m);
            out.set_product(sum)?;
        }
        Ok(out)
    }

    /// Strict unit axioms, when a unit is declared.
    pub fn check_unit(&self) -> Result<()> {
        let Some(u) = self.unit else { return Ok(()) };
        let one = Rational::from_integer(1.into());
        for a in 0..self.dim() {
            let expect: SparseVec = [(a, one.clone())].into();
            let m2 = self.product(2);
            let left = m2.and_then(|m| m.get(&[u, a])).cloned().unwrap_or_default();
            let right = m2.and_then(|m| m.get(&[a, u])).cloned().unwrap_or_default();
            if left != expect || right != expect {
                return Err(Error::Invariant(format!(
                    "unit `{}` does not act as identity on `{}`",
                    self.space.name(u),
                    self.space.name(a)
                )));
            }
        }
        for (k, m) in &self.products {
            if *k == 2 {
                continue;
            }
            if let Some(t) = m.entries().keys().find(|t| t.contains(&u)) {
                return Err(Error::Invariant(format!(
                    "m_{k} is nonzero on the unit input ({})",
                    names(&self.space, t)
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn names(space: &SuperSpace, t: &[usize]) -> String {
    t.iter()
        .map(|&i| space.name(i))
        .collect::<Vec<_>>()
        .join(",")
}

/// `(basis name, coefficient)` pairs, for reports.
pub fn render_vector(space: &SuperSpace, v: &SparseVec) -> Vec<(String, String)> {
    v.iter()
        .map(|(i, c)| (space.name(*i).to_string(), format_rational(c)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub arity: usize,
    pub inputs: Vec<String>,
    #[serde(skip)]
    pub indices: Vec<usize>,
    pub value: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub n_max: usize,
    pub k_max: usize,
    pub passed: bool,
    pub tuples_checked: usize,
    pub first_violation: Option<Violation>,
}

/// Left-hand side of the arity-`n` relation on a basis tuple.
pub fn relation_value(a: &AInftyAlgebra, tuple: &[usize]) -> SparseVec {
    let n = tuple.len();
    let sp = &a.space;
    let mut out = SparseVec::new();
    for (&s, ms) in &a.products {
        if s > n {
            break;
        }
        for r in 0..=n - s {
            let t = n - r - s;
            let u = r + 1 + t;
            let Some(mu) = a.products.get(&u) else { continue };
            let Some(inner) = ms.get(&tuple[r..r + s]) else { continue };
            let pre: usize = tuple[..r].iter().map(|&i| sp.parity(i) as usize).sum();
            let sg = sign(r + s * t + s * pre);
            let mut outer_in: Vec<usize> = Vec::with_capacity(u);
            outer_in.extend_from_slice(&tuple[..r]);
            outer_in.push(0);
            outer_in.extend_from_slice(&tuple[r + s..]);
            for (x, c) in inner {
                outer_in[r] = *x;
                if let Some(v) = mu.get(&outer_in) {
                    axpy(&mut out, &(c * &sg), v);
                }
            }
        }
    }
    out
}

/// Checks the relations for every arity `1..=n_max`, reporting the first
/// violation in (arity, lexicographic tuple) order.
pub fn check_ainfty(a: &AInftyAlgebra, n_max: usize) -> RelationReport {
    let mut checked = 0;
    for n in 1..=n_max {
        for t in a.space.tuples(n) {
            checked += 1;
            let v = relation_value(a, &t);
            if !v.is_empty() {
                return RelationReport {
                    n_max,
                    k_max: a.k_max(),
                    passed: false,
                    tuples_checked: checked,
                    first_violation: Some(Violation {
                        arity: n,
                        inputs: t.iter().map(|&i| a.space.name(i).to_string()).collect(),
                        indices: t,
                        value: render_vector(&a.space, &v),
                    }),
                };
            }
        }
    }
    RelationReport {
        n_max,
        k_max: a.k_max(),
        passed: true,
        tuples_checked: checked,
        first_violation: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct McReport {
    pub n_max: usize,
    /// `{b+b', b+b'} = 0` through the brace bracket.
    pub bracket: RelationReport,
    /// The relations of the summed structure `m + m'`.
    pub relations: RelationReport,
    pub paths_agree: bool,
}

/// Maurer–Cartan check for a perturbation `m'` of `a`, by two paths.
pub fn mc_check(a: &AInftyAlgebra, m_prime: &AInftyAlgebra, n_max: usize) -> Result<McReport> {
    for (k, m) in m_prime.products() {
        if m.parity() != (k % 2) as Parity {
            return Err(Error::Parity(format!("perturbation m'_{k} has the wrong parity")));
        }
    }
    let sum = a.perturbed(m_prime)?;
    let relations = check_ainfty(&sum, n_max);
    let bracket = bracket_relation(&sum, n_max);
    let paths_agree = relations.passed == bracket.passed
        && relations.first_violation.as_ref().map(|v| (v.arity, &v.indices))
            == bracket.first_violation.as_ref().map(|v| (v.arity, &v.indices));
    Ok(McReport {
        n_max,
        bracket,
        relations,
        paths_agree,
    })
}

/// Evaluates `b∘b` (half of `{b,b}`) for the décalage `b` of `a`.
pub fn bracket_relation(a: &AInftyAlgebra, n_max: usize) -> RelationReport {
    let b = hochschild::structure_cochain(a);
    let (sq, _) = hochschild::brace(&b, &b, n_max);
    let mut checked = 0;
    for n in 1..=n_max {
        let comp = sq.component(n);
        for t in a.space.tuples(n) {
            checked += 1;
            let Some(v) = comp.and_then(|c| c.get(&t)) else { continue };
            return RelationReport {
                n_max,
                k_max: a.k_max(),
                passed: false,
                tuples_checked: checked,
                first_violation: Some(Violation {
                    arity: n,
                    inputs: t.iter().map(|&i| a.space.name(i).to_string()).collect(),
                    indices: t,
                    value: render_vector(&a.space, v),
                }),
            };
        }
    }
    RelationReport {
        n_max,
        k_max: a.k_max(),
        passed: true,
        tuples_checked: checked,
        first_violation: None,
    }
}

/// The algebra viewed as a Hochschild cochain (undécalaged); convenience
/// for callers that want `m` itself rather than `b`.
pub fn as_cochain(a: &AInftyAlgebra) -> Cochain {
    let mut c = Cochain::zero(a.space.clone(), 1);
    for (_, m) in a.products() {
        c.set_component(m.clone()).expect("m_k is shifted-odd");
    }
    c
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BasisEntry {
    pub(crate) name: String,
    pub(crate) parity: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ProductEntry {
    pub(crate) arity: usize,
    pub(crate) inputs: Vec<String>,
    pub(crate) output: String,
    pub(crate) coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    basis: Vec<BasisEntry>,
    unit: Option<String>,
    products: Vec<ProductEntry>,
}

/// A loaded algebra together with loader warnings.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub algebra: AInftyAlgebra,
    pub warnings: Vec<String>,
    pub note: Option<String>,
}

pub(crate) fn space_from_json(basis: &[(String, u8)]) -> Result<SuperSpace> {
    SuperSpace::new(basis.to_vec())
}

pub fn load_algebra_str(text: &str) -> Result<Loaded> {
    let file: AlgebraFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let basis: Vec<(String, u8)> = file.basis.iter().map(|b| (b.name.clone(), b.parity)).collect();
    let space = space_from_json(&basis)?;
    let lookup = |n: &str| space.index_of(n).ok_or_else(|| Error::DanglingName(n.to_string()));
    let unit = file.unit.as_deref().map(lookup).transpose()?;
    let mut a = AInftyAlgebra::new(space.clone(), unit)?;
    let mut warnings = Vec::new();
    let contraction = file.kind.as_deref() == Some("contraction");
    for (i, p) in file.products.iter().enumerate() {
        if p.arity != p.inputs.len() {
            return Err(Error::Schema(format!(
                "product entry #{i}: arity {} but {} inputs",
                p.arity,
                p.inputs.len()
            )));
        }
        if p.arity == 0 {
            return Err(Error::Schema(format!("product entry #{i}: arity must be positive")));
        }
        let inputs = p.inputs.iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>()?;
        let out = lookup(&p.output)?;
        let c = parse_rational(&p.coeff).map_err(|e| match e {
            Error::ZeroDenominator(_) => e,
            _ => Error::Schema(format!("product entry #{i}: bad coefficient `{}`", p.coeff)),
        })?;
        a.add_entry(inputs, out, c).map_err(|e| match e {
            Error::Parity(_) => Error::Parity(format!(
                "product entry #{i} m_{}({}) -> {} violates the parity rule",
                p.arity,
                p.inputs.join(","),
                p.output
            )),
            other => other,
        })?;
        if contraction && p.arity % 2 == 1 {
            warnings.push(format!(
                "product entry #{i}: odd arity {} in a contraction algebra",
                p.arity
            ));
        }
    }
    a.check_unit()?;
    Ok(Loaded {
        algebra: a,
        warnings,
        note: file.note,
    })
}

pub fn load_algebra(path: &std::path::Path) -> Result<Loaded> {
    load_algebra_str(&std::fs::read_to_string(path)?)
}

/// Canonical JSON: products sorted by arity, input indices, output index.
pub fn save_algebra_string(a: &AInftyAlgebra, note: Option<&str>) -> String {
    let sp = &a.space;
    let mut products = Vec::new();
    for (k, m) in &a.products {
        for (t, v) in m.entries() {
            for (o, c) in v {
                products.push(ProductEntry {
                    arity: *k,
                    inputs: t.iter().map(|&i| sp.name(i).to_string()).collect(),
                    output: sp.name(*o).to_string(),
                    coeff: format_rational(c),
                });
            }
        }
    }
    let file = AlgebraFile {
        note: note.map(str::to_string),
        kind: None,
        basis: (0..sp.dim())
            .map(|i| BasisEntry {
                name: sp.name(i).to_string(),
                parity: sp.parity(i),
            })
            .collect(),
        unit: a.unit.map(|u| sp.name(u).to_string()),
        products,
    };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

pub fn save_algebra(a: &AInftyAlgebra, note: Option<&str>, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, save_algebra_string(a, note))?;
    Ok(())
}

/// Associative algebra from a multiplication table `(i, j) -> [(k, c)]`.
pub fn associative(
    space: SuperSpace,
    unit: Option<usize>,
    table: &[((usize, usize), Vec<(usize, Rational)>)],
) -> Result<AInftyAlgebra> {
    let mut a = AInftyAlgebra::new(space, unit)?;
    for ((i, j), out) in table {
        for (k, c) in out {
            a.add_entry(vec![*i, *j], *k, c.clone())?;
        }
    }
    Ok(a)
}

/// The truncated polynomial algebra `k[x]/(x^n)` with basis `1, x, .., x^{n-1}`.
pub fn truncated_polynomial(n: usize) -> AInftyAlgebra {
    let names: Vec<(String, u8)> = (0..n)
        .map(|i| match i {
            0 => ("1".to_string(), 0),
            1 => ("x".to_string(), 0),
            _ => (format!("x^{i}"), 0),
        })
        .collect();
    let space = SuperSpace::new(names).expect("distinct names");
    let mut table = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i + j < n {
                table.push(((i, j), vec![(i + j, Rational::from_integer(1.into()))]));
            }
        }
    }
    associative(space, Some(0), &table).expect("valid table")
}

/// The exterior algebra `Λ(ξ)` on one odd generator, optionally with
/// `ξ·ξ = c` (a Clifford algebra when `c ≠ 0`).
pub fn exterior_one(square: Option<Rational>) -> AInftyAlgebra {
    let space = SuperSpace::from_pairs(&[("1", 0), ("xi", 1)]);
    let one = Rational::from_integer(1.into());
    let mut table = vec![
        ((0, 0), vec![(0, one.clone())]),
        ((0, 1), vec![(1, one.clone())]),
        ((1, 0), vec![(1, one)]),
    ];
    if let Some(c) = square {
        table.push(((1, 1), vec![(0, c)]));
    }
    associative(space, Some(0), &table).expect("valid table")
}

/// The ground field.
pub fn ground_field() -> AInftyAlgebra {
    truncated_polynomial(1)
}
