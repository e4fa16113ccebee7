//! Filtered multiplicative bases: verification and the explicit constructions.
//!
//! A basis `B` of KG is filtered multiplicative when every product of two
//! members is 0 or a member, and `B ∩ I` is a basis of the augmentation
//! ideal `I`. The verifier checks the stronger level-wise form: `B ∩ I^k`
//! is a basis of `I^k` for every k.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{Field, FieldError, FieldSpec, Scalar};
use crate::galg::{compute_filtration, decode_coeffs, encode_coeffs, AlgebraElement, AlgebraError, Filtration, GroupAlgebra, Level};
use crate::grp::{build_group, GroupError, GroupSpec};
use crate::linalg::{find_dependence, EchelonBasis};

#[derive(Debug, Error)]
pub enum FmbError {
    #[error("candidate is empty")]
    Empty,
    #[error("candidate members live in different group algebras")]
    Mismatch,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("label count {labels} does not match element count {elements}")]
    LabelCount { labels: usize, elements: usize },
    #[error("field characteristic {field} does not match the {group}-group")]
    Characteristic { field: u32, group: u32 },
    #[error("construction {construction} needs {expected}, got {got}")]
    WrongGroup { construction: &'static str, expected: &'static str, got: String },
    #[error("field {0} has no primitive cube root of unity")]
    NoCubeRoot(String),
    #[error("{0} is not a primitive cube root of unity")]
    NotCubeRoot(String),
    #[error("mu1 and mu2 must differ")]
    EqualMu,
    #[error("the zero element has no leading quotient")]
    ZeroElement,
    #[error("bad word {0:?}")]
    Word(String),
    #[error("precomputed filtration has quotient dims {given:?}, expected {expected:?}")]
    StaleFiltration { given: Vec<usize>, expected: Vec<usize> },
    #[error("basis file: {0}")]
    Report(String),
    #[error("unknown construction {0:?}")]
    UnknownConstruction(String),
    #[error("no explicit construction for {0}")]
    NoConstruction(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Labeled elements of one group algebra, plus the named scalars used to build them.
#[derive(Clone, Debug)]
pub struct BasisCandidate {
    algebra: Arc<GroupAlgebra>,
    elements: Vec<AlgebraElement>,
    labels: Vec<String>,
    params: Vec<(String, Scalar)>,
}

impl BasisCandidate {
    pub fn new(
        elements: Vec<AlgebraElement>,
        labels: Vec<String>,
        params: Vec<(String, Scalar)>,
    ) -> Result<Self, FmbError> {
        let algebra = Arc::clone(elements.first().ok_or(FmbError::Empty)?.algebra());
        if elements.iter().any(|e| **e.algebra() != *algebra) {
            return Err(FmbError::Mismatch);
        }
        if labels.len() != elements.len() {
            return Err(FmbError::LabelCount { labels: labels.len(), elements: elements.len() });
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(FmbError::DuplicateLabel(l.clone()));
            }
        }
        Ok(BasisCandidate { algebra, elements, labels, params })
    }

    pub fn algebra(&self) -> &Arc<GroupAlgebra> {
        &self.algebra
    }

    pub fn elements(&self) -> &[AlgebraElement] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn params(&self) -> &[(String, Scalar)] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&AlgebraElement> {
        self.labels.iter().position(|l| l == label).map(|i| &self.elements[i])
    }

    pub fn to_report(&self) -> Result<CandidateReport, FmbError> {
        let field = self.algebra.field();
        Ok(CandidateReport {
            group: self.algebra.group().spec().cloned().ok_or(AlgebraError::Unnamed)?,
            field: field.spec().clone(),
            params: self.params.iter().map(|(n, s)| ParamReport { name: n.clone(), value: field.coeffs(*s) }).collect(),
            members: self
                .labels
                .iter()
                .zip(&self.elements)
                .map(|(l, e)| MemberReport { label: l.clone(), coeffs: encode_coeffs(field, e.coeffs()) })
                .collect(),
        })
    }

    /// Rebuilds a candidate from its serialized form, constructing a fresh algebra.
    pub fn from_report(report: &CandidateReport) -> Result<Self, FmbError> {
        let group = build_group(&report.group)?;
        let field = Field::from_spec(report.field.clone());
        let kg = GroupAlgebra::new(Arc::new(group), Arc::new(field));
        Self::from_report_in(&kg, report)
    }

    /// Rebuilds a candidate inside an existing algebra, which must match the report.
    pub fn from_report_in(kg: &Arc<GroupAlgebra>, report: &CandidateReport) -> Result<Self, FmbError> {
        if kg.group().spec() != Some(&report.group) || kg.field().spec() != &report.field {
            return Err(FmbError::Report(format!(
                "basis is for {} over {}, expected {:?} over {}",
                report.group,
                report.field,
                kg.group().spec().map(ToString::to_string),
                kg.field().spec()
            )));
        }
        let field = kg.field();
        let params = report
            .params
            .iter()
            .map(|p| Ok((p.name.clone(), field.from_coeffs(&p.value)?)))
            .collect::<Result<Vec<_>, FmbError>>()?;
        let elements = report
            .members
            .iter()
            .map(|m| decode_coeffs(kg, &m.coeffs))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(elements, report.members.iter().map(|m| m.label.clone()).collect(), params)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamReport {
    pub name: String,
    pub value: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberReport {
    pub label: String,
    pub coeffs: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub group: GroupSpec,
    pub field: FieldSpec,
    pub params: Vec<ParamReport>,
    pub members: Vec<MemberReport>,
}

/// Evidence attached to a failed (or informational) check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Cardinality { expected: usize, found: usize },
    /// A nontrivial relation `Σ c_i b_i = 0`.
    Dependence { relation: Vec<(String, Vec<u32>)> },
    /// A product that is neither 0 nor a member.
    Product { left: String, right: String, product: Vec<Vec<u32>> },
    /// `B ∩ I^k` has `members` elements spanning `rank` dimensions, but `dim I^k = dim`.
    Level { level: usize, members: usize, rank: usize, dim: usize },
    /// Distinct members outside `I^k` that agree modulo `I^k`.
    Congruence { left: String, right: String, levels: (Level, Level), congruent_mod: usize },
    GeneratorCount { found: usize, expected: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub informational: bool,
    pub detail: String,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    /// First witness from a failing decisive check.
    pub witness: Option<Witness>,
    /// Filtration level of each member, in candidate order.
    pub member_levels: Vec<Level>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_NAMES: [&str; 5] =
    ["cardinality_independence", "closure", "radical_levels", "property_ii", "generator_count"];

const WITNESS_CAP: usize = 16;

/// Runs checks (a)–(e). The verdict depends on (a)–(c) only; (d) and (e)
/// are consequences of the definition and are reported for diagnostics.
pub fn verify(candidate: &BasisCandidate, precomputed: Option<&Filtration>) -> Result<VerificationReport, FmbError> {
    let kg = candidate.algebra();
    let field = kg.field();
    let own;
    let filt = match precomputed {
        Some(f) => {
            if **f.algebra() != **kg {
                return Err(FmbError::Mismatch);
            }
            // cheap independent cross-check: the Jennings prediction from the group alone
            let predicted = kg.group().jennings_quotient_dims();
            if f.quotient_dims() != predicted {
                return Err(FmbError::StaleFiltration { given: f.quotient_dims(), expected: predicted });
            }
            f
        }
        None => {
            own = compute_filtration(kg)?;
            &own
        }
    };
    let els = candidate.elements();
    let labels = candidate.labels();
    let levels: Vec<Level> = els.iter().map(|e| filt.filtration_level(e)).collect();
    let mut checks = Vec::with_capacity(5);

    // (a) cardinality and linear independence
    {
        let mut witnesses = Vec::new();
        if els.len() != kg.dim() {
            witnesses.push(Witness::Cardinality { expected: kg.dim(), found: els.len() });
        }
        let vectors: Vec<Vec<Scalar>> = els.iter().map(|e| e.coeffs().to_vec()).collect();
        if let Some(rel) = find_dependence(field, &vectors) {
            witnesses.push(Witness::Dependence {
                relation: rel
                    .iter()
                    .zip(labels)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, l)| (l.clone(), field.coeffs(*c)))
                    .collect(),
            });
        }
        checks.push(Check {
            name: CHECK_NAMES[0].into(),
            passed: witnesses.is_empty(),
            informational: false,
            detail: format!("{} members for dimension {}", els.len(), kg.dim()),
            witnesses,
        });
    }

    // (b) closure under multiplication
    {
        let index: HashMap<&[Scalar], usize> = els.iter().enumerate().map(|(i, e)| (e.coeffs(), i)).collect();
        let mut witnesses = Vec::new();
        let mut zero_products = 0usize;
        let mut outside = 0usize;
        for (i, x) in els.iter().enumerate() {
            for (j, y) in els.iter().enumerate() {
                let prod = kg.mul_raw(x.coeffs(), y.coeffs());
                if prod.iter().all(|s| s.is_zero()) {
                    zero_products += 1;
                } else if !index.contains_key(prod.as_slice()) {
                    outside += 1;
                    if witnesses.len() >= WITNESS_CAP {
                        continue;
                    }
                    witnesses.push(Witness::Product {
                        left: labels[i].clone(),
                        right: labels[j].clone(),
                        product: encode_coeffs(field, &prod),
                    });
                }
            }
        }
        checks.push(Check {
            name: CHECK_NAMES[1].into(),
            passed: witnesses.is_empty(),
            informational: false,
            detail: format!("{outside} of {n2} products outside the set, {zero_products} zero", n2 = els.len() * els.len()),
            witnesses,
        });
    }

    // (c) B ∩ I^k is a basis of I^k for every nonzero level k ≥ 1
    {
        let mut witnesses = Vec::new();
        for k in 1..filt.length() {
            let inside: Vec<&[Scalar]> =
                els.iter().zip(&levels).filter(|(_, &l)| l >= Level::At(k)).map(|(e, _)| e.coeffs()).collect();
            let rank = EchelonBasis::span(field, kg.dim(), inside.iter().copied()).rank();
            let dim = filt.level(k).rank();
            if inside.len() != dim || rank != dim {
                witnesses.push(Witness::Level { level: k, members: inside.len(), rank, dim });
            }
        }
        checks.push(Check {
            name: CHECK_NAMES[2].into(),
            passed: witnesses.is_empty(),
            informational: false,
            detail: format!("levels 1..{} against dims {:?}", filt.length(), filt.dims()),
            witnesses,
        });
    }

    // (d) distinct members outside I^k never agree modulo I^k
    {
        let mut witnesses = Vec::new();
        for i in 0..els.len() {
            for j in i + 1..els.len() {
                let (Level::At(li), Level::At(lj)) = (levels[i], levels[j]) else { continue };
                let diff = kg.sub_raw(els[i].coeffs(), els[j].coeffs());
                if let Level::At(ld) = filt.level_of(&diff) {
                    if ld > li.max(lj) {
                        witnesses.push(Witness::Congruence {
                            left: labels[i].clone(),
                            right: labels[j].clone(),
                            levels: (levels[i], levels[j]),
                            congruent_mod: ld,
                        });
                    }
                }
            }
        }
        witnesses.truncate(WITNESS_CAP);
        checks.push(Check {
            name: CHECK_NAMES[3].into(),
            passed: witnesses.is_empty(),
            informational: true,
            detail: "pairs congruent beyond both of their levels".into(),
            witnesses,
        });
    }

    // (e) members in I \ I² generate the radical
    {
        let found = levels.iter().filter(|&&l| l == Level::At(1)).count();
        let expected = filt.quotient_dims().get(1).copied().unwrap_or(0);
        checks.push(Check {
            name: CHECK_NAMES[4].into(),
            passed: found == expected,
            informational: true,
            detail: format!("{found} members in I \\ I², dim I/I² = {expected}"),
            witnesses: if found == expected { vec![] } else { vec![Witness::GeneratorCount { found, expected }] },
        });
    }

    let failing = checks.iter().find(|c| !c.informational && !c.passed);
    Ok(VerificationReport {
        verdict: if failing.is_some() { Verdict::Fail } else { Verdict::Pass },
        witness: failing.and_then(|c| c.witnesses.first().cloned()),
        checks,
        member_levels: levels,
    })
}

/// Label of a word in named generators, with runs compressed: `u^2*v`.
pub fn word_label(word: &[usize], names: &[String]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    let mut parts = Vec::new();
    let mut i = 0;
    while i < word.len() {
        let j = (i..word.len()).find(|&j| word[j] != word[i]).unwrap_or(word.len());
        let name = &names[word[i]];
        parts.push(if j - i == 1 { name.clone() } else { format!("{name}^{}", j - i) });
        i = j;
    }
    parts.join("*")
}

/// Evaluates a word label such as `u*v^2*u` against named elements.
pub fn evaluate_word(
    kg: &Arc<GroupAlgebra>,
    label: &str,
    named: &[(&str, &AlgebraElement)],
) -> Result<AlgebraElement, FmbError> {
    let bad = || FmbError::Word(label.to_string());
    if label.trim() == "1" {
        return Ok(kg.one());
    }
    let mut acc = kg.one();
    for factor in label.split('*') {
        let (name, exp) = match factor.trim().split_once('^') {
            Some((n, e)) => (n.trim(), e.trim().parse::<u32>().map_err(|_| bad())?),
            None => (factor.trim(), 1),
        };
        let (_, x) = named.iter().find(|(n, _)| *n == name).ok_or_else(bad)?;
        acc = acc.try_mul(&x.pow(exp))?;
    }
    Ok(acc)
}

fn require_characteristic(kg: &GroupAlgebra) -> Result<(), FmbError> {
    let (field, group) = (kg.field().characteristic(), kg.group().prime());
    if kg.group().order() > 1 && field != group {
        return Err(FmbError::Characteristic { field, group });
    }
    Ok(())
}

fn labelled(kg: &Arc<GroupAlgebra>, labels: &[String], named: &[(&str, &AlgebraElement)], params: Vec<(String, Scalar)>) -> Result<BasisCandidate, FmbError> {
    let elements = labels.iter().map(|l| evaluate_word(kg, l, named)).collect::<Result<Vec<_>, _>>()?;
    BasisCandidate::new(elements, labels.to_vec(), params)
}

/// `{(a₁−1)^{n₁}⋯(a_s−1)^{n_s} : 0 ≤ nᵢ < |aᵢ|}` over the designated generators.
pub fn construct_abelian(kg: &Arc<GroupAlgebra>) -> Result<BasisCandidate, FmbError> {
    let group = kg.group();
    if !group.is_abelian() {
        return Err(FmbError::WrongGroup { construction: "abelian", expected: "an abelian group", got: spec_name(kg) });
    }
    require_characteristic(kg)?;
    let gens = group.generators();
    let orders: Vec<usize> = gens.iter().map(|&g| group.element_order(g)).collect();
    let atoms: Vec<AlgebraElement> = gens.iter().map(|&g| kg.embed_aug(g)).collect();
    let names: Vec<String> = (0..gens.len()).map(|i| crate::grp::generator_name(i).to_string()).collect();
    let total: usize = orders.iter().product();
    let mut elements = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut x = kg.one();
        let mut parts = Vec::new();
        for (i, &o) in orders.iter().enumerate() {
            let e = idx % o;
            idx /= o;
            if e > 0 {
                x = &x * &atoms[i].pow(e as u32);
                parts.push(if e == 1 { format!("({}-1)", names[i]) } else { format!("({}-1)^{e}", names[i]) });
            }
        }
        labels.push(if parts.is_empty() { "1".into() } else { parts.join("*") });
        elements.push(x);
    }
    BasisCandidate::new(elements, labels, vec![])
}

/// All products `b₁ b₂` embedded in `K[G₁ × G₂]`, where `kg` is the algebra of
/// the direct product laid out as `g + |G₁|·h`.
pub fn product_basis(left: &BasisCandidate, right: &BasisCandidate, kg: &Arc<GroupAlgebra>) -> Result<BasisCandidate, FmbError> {
    let (g1, g2) = (left.algebra().group(), right.algebra().group());
    let (n1, n2) = (g1.order(), g2.order());
    let field = kg.field();
    if left.algebra().field().spec() != field.spec() || right.algebra().field().spec() != field.spec() {
        return Err(FmbError::Mismatch);
    }
    let g = kg.group();
    let layout_ok = g.order() == n1 * n2
        && (0..n1).all(|x| (0..n1).all(|y| g.mul(x, y) == g1.mul(x, y)))
        && (0..n2).all(|x| (0..n2).all(|y| g.mul(n1 * x, n1 * y) == n1 * g2.mul(x, y)))
        && (0..n1).all(|x| (0..n2).all(|y| g.mul(x, n1 * y) == x + n1 * y && g.mul(n1 * y, x) == x + n1 * y));
    if !layout_ok {
        return Err(FmbError::WrongGroup {
            construction: "product",
            expected: "the direct product of the factor groups",
            got: spec_name(kg),
        });
    }
    let mut elements = Vec::with_capacity(left.len() * right.len());
    let mut labels = Vec::with_capacity(left.len() * right.len());
    for (y, ly) in right.elements().iter().zip(right.labels()) {
        for (x, lx) in left.elements().iter().zip(left.labels()) {
            let mut c = vec![Scalar::ZERO; g.order()];
            for (h, &yh) in y.coeffs().iter().enumerate() {
                if yh.is_zero() {
                    continue;
                }
                for (gi, &xg) in x.coeffs().iter().enumerate() {
                    c[gi + n1 * h] = field.mul(xg, yh);
                }
            }
            elements.push(kg.from_coeffs(c)?);
            labels.push(match (lx.as_str(), ly.as_str()) {
                ("1", "1") => "1".to_string(),
                _ => format!("{lx}⊗{ly}"),
            });
        }
    }
    let mut params: Vec<(String, Scalar)> = left.params().to_vec();
    params.extend(right.params().iter().cloned());
    BasisCandidate::new(elements, labels, params)
}

fn spec_name(kg: &GroupAlgebra) -> String {
    kg.group().spec().map_or_else(|| "an unnamed group".into(), ToString::to_string)
}

fn require_char_two(kg: &GroupAlgebra) -> Result<(), FmbError> {
    let p = kg.field().characteristic();
    if p != 2 {
        return Err(FmbError::Characteristic { field: p, group: 2 });
    }
    require_characteristic(kg)
}

/// `u = a + b`, `v = 1 + b` and the words
/// `1, v, u^i, v u^i, u^j v, v u^j v` for `1 ≤ i ≤ 2^{n−1}`, `1 ≤ j < 2^{n−1}`.
pub fn construct_dihedral(kg: &Arc<GroupAlgebra>) -> Result<BasisCandidate, FmbError> {
    let n = match kg.group().spec() {
        Some(GroupSpec::Dihedral { n }) => *n,
        _ => return Err(FmbError::WrongGroup { construction: "dihedral", expected: "dihedral(n)", got: spec_name(kg) }),
    };
    require_char_two(kg)?;
    let g = kg.group();
    let (a, b) = (kg.basis(g.gen_a().unwrap()), kg.basis(g.gen_b().unwrap()));
    let u = &a + &b;
    let v = &kg.one() + &b;
    let half = 1usize << (n - 1);
    let pw = |w: &str, i: usize| if i == 1 { w.to_string() } else { format!("{w}^{i}") };
    let mut labels: Vec<String> = vec!["1".into(), "v".into()];
    labels.extend((1..=half).map(|i| pw("u", i)));
    labels.extend((1..=half).map(|i| format!("v*{}", pw("u", i))));
    labels.extend((1..half).map(|j| format!("{}*v", pw("u", j))));
    labels.extend((1..half).map(|j| format!("v*{}*v", pw("u", j))));
    labelled(kg, &labels, &[("u", &u), ("v", &v)], vec![("alpha".into(), Scalar::ONE), ("beta".into(), Scalar::ONE)])
}

fn is_quaternion8(spec: Option<&GroupSpec>) -> bool {
    matches!(spec, Some(GroupSpec::Quaternion8))
        || spec.and_then(GroupSpec::metacyclic_params) == GroupSpec::Quaternion8.metacyclic_params()
}

/// `u = ω(1+a) + (1+b) + ω²(1+a)(1+b)`, `v = ω²(1+a) + (1+b) + ω(1+a)(1+b)`
/// and the words `1, u, v, uv, vu, uvu, vuv, uvuv`.
///
/// The quadratic terms are needed: no pair of generators that are linear in
/// `1+a`, `1+b` yields a closed word set, whatever the coefficients.
pub fn construct_quaternion8(kg: &Arc<GroupAlgebra>, omega: Option<Scalar>) -> Result<BasisCandidate, FmbError> {
    if !is_quaternion8(kg.group().spec()) {
        return Err(FmbError::WrongGroup { construction: "quaternion8", expected: "quaternion8", got: spec_name(kg) });
    }
    require_char_two(kg)?;
    let field = kg.field();
    let w = match omega {
        Some(w) => {
            if !field.contains(w) || w == Scalar::ONE || field.pow(w, 3) != Scalar::ONE {
                return Err(FmbError::NotCubeRoot(if field.contains(w) { field.display(w) } else { format!("#{}", w.index()) }));
            }
            w
        }
        None => field.primitive_cube_root().ok_or_else(|| FmbError::NoCubeRoot(field.spec().to_string()))?,
    };
    let g = kg.group();
    let xa = kg.embed_aug(g.gen_a().unwrap());
    let xb = kg.embed_aug(g.gen_b().unwrap());
    let w2 = field.mul(w, w);
    let ab = &xa * &xb;
    let u = &(&xa.scale(w)? + &xb) + &ab.scale(w2)?;
    let v = &(&xa.scale(w2)? + &xb) + &ab.scale(w)?;
    let labels: Vec<String> =
        ["1", "u", "v", "u*v", "v*u", "u*v*u", "v*u*v", "u*v*u*v"].iter().map(|s| s.to_string()).collect();
    labelled(kg, &labels, &[("u", &u), ("v", &v)], vec![("omega".into(), w)])
}

pub const EXAMPLE16_WORDS: [&str; 16] = [
    "1", "u", "v", "u*v", "v*u", "v^2", "u*v*u", "u*v^2", "v*u*v", "v^3", "u*v*u*v", "u*v^3", "v*u*v^2", "u*v*u*v^2",
    "v*u*v^3", "u*v*u*v^3",
];

/// `u = a + b`, `v = μ₁a + μ₂b + (μ₁ + μ₂)` with `μ₁ ≠ μ₂`.
pub fn construct_example16(kg: &Arc<GroupAlgebra>, mu1: Scalar, mu2: Scalar) -> Result<BasisCandidate, FmbError> {
    if !matches!(kg.group().spec(), Some(GroupSpec::Example16)) {
        return Err(FmbError::WrongGroup { construction: "example16", expected: "example16", got: spec_name(kg) });
    }
    require_char_two(kg)?;
    let field = kg.field();
    if !field.contains(mu1) || !field.contains(mu2) {
        return Err(FmbError::Algebra(AlgebraError::ForeignScalar));
    }
    if mu1 == mu2 {
        return Err(FmbError::EqualMu);
    }
    let g = kg.group();
    let (a, b) = (kg.basis(g.gen_a().unwrap()), kg.basis(g.gen_b().unwrap()));
    let u = &a + &b;
    let v = &(&a.scale(mu1)? + &b.scale(mu2)?) + &kg.scalar(field.add(mu1, mu2));
    let labels: Vec<String> = EXAMPLE16_WORDS.iter().map(|s| s.to_string()).collect();
    labelled(kg, &labels, &[("u", &u), ("v", &v)], vec![("mu1".into(), mu1), ("mu2".into(), mu2)])
}

/// Named entry points for the explicit constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Picked from the group spec; products recurse into their factors.
    Auto,
    Abelian,
    Dihedral,
    Quaternion8,
    Example16,
    Product,
}

impl std::str::FromStr for Construction {
    type Err = FmbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "auto" => Construction::Auto,
            "abelian" => Construction::Abelian,
            "dihedral" => Construction::Dihedral,
            "quaternion8" => Construction::Quaternion8,
            "example16" => Construction::Example16,
            "product" => Construction::Product,
            _ => return Err(FmbError::UnknownConstruction(s.to_string())),
        })
    }
}

/// Optional scalars for [`construct`]. `mu` defaults to `(0, 1)`; `omega`
/// defaults to the field's first primitive cube root.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstructParams {
    pub mu: Option<(Scalar, Scalar)>,
    pub omega: Option<Scalar>,
}

pub fn construct(kg: &Arc<GroupAlgebra>, which: Construction, params: &ConstructParams) -> Result<BasisCandidate, FmbError> {
    let spec = kg.group().spec().cloned();
    let which = match (which, &spec) {
        (Construction::Auto, Some(GroupSpec::Abelian { .. })) => Construction::Abelian,
        (Construction::Auto, Some(GroupSpec::Dihedral { .. })) => Construction::Dihedral,
        (Construction::Auto, Some(GroupSpec::Example16)) => Construction::Example16,
        (Construction::Auto, Some(GroupSpec::DirectProduct { .. })) => Construction::Product,
        (Construction::Auto, _) if is_quaternion8(spec.as_ref()) => Construction::Quaternion8,
        (Construction::Auto, _) => return Err(FmbError::NoConstruction(spec_name(kg))),
        (w, _) => w,
    };
    match which {
        Construction::Abelian => construct_abelian(kg),
        Construction::Dihedral => construct_dihedral(kg),
        Construction::Quaternion8 => construct_quaternion8(kg, params.omega),
        Construction::Example16 => {
            let (m1, m2) = params.mu.unwrap_or((Scalar::ZERO, Scalar::ONE));
            construct_example16(kg, m1, m2)
        }
        Construction::Product => {
            let Some(GroupSpec::DirectProduct { left, right }) = spec else {
                return Err(FmbError::WrongGroup { construction: "product", expected: "product(spec,spec)", got: spec_name(kg) });
            };
            let factor = |s: &GroupSpec| -> Result<BasisCandidate, FmbError> {
                let fkg = GroupAlgebra::new(Arc::new(build_group(s)?), kg.field().clone());
                construct(&fkg, Construction::Auto, params)
            };
            product_basis(&factor(&left)?, &factor(&right)?, kg)
        }
        Construction::Auto => unreachable!(),
    }
}

/// Level of `x` and the coordinates of its class in `I^k / I^{k+1}`.
pub fn leading_quotient(x: &AlgebraElement, filt: &Filtration) -> Result<(usize, Vec<Scalar>), FmbError> {
    match filt.filtration_level(x) {
        Level::Zero => Err(FmbError::ZeroElement),
        Level::At(k) => Ok((k, filt.quotient_coordinates(k, x.coeffs()))),
    }
}

/// `1` together with every distinct nonzero word in the generators, found
/// breadth-first (shortest label wins). Stops once more than `cap` members exist.
pub fn word_closure_candidate(
    kg: &Arc<GroupAlgebra>,
    generators: &[(String, AlgebraElement)],
    cap: usize,
) -> Result<BasisCandidate, FmbError> {
    let names: Vec<String> = generators.iter().map(|(n, _)| n.clone()).collect();
    let mut elements = vec![kg.one()];
    let mut labels = vec!["1".to_string()];
    let mut seen: HashMap<Vec<Scalar>, ()> = HashMap::from([(kg.one().into_coeffs(), ())]);
    let mut frontier: Vec<(Vec<usize>, Vec<Scalar>)> = vec![(vec![], kg.one().into_coeffs())];
    while !frontier.is_empty() && elements.len() <= cap {
        let mut next = Vec::new();
        for (word, x) in &frontier {
            for (gi, (_, g)) in generators.iter().enumerate() {
                let y = kg.mul_raw(x, g.coeffs());
                if y.iter().all(|s| s.is_zero()) || seen.contains_key(&y) {
                    continue;
                }
                seen.insert(y.clone(), ());
                let mut w = word.clone();
                w.push(gi);
                labels.push(word_label(&w, &names));
                elements.push(kg.from_coeffs(y.clone())?);
                next.push((w, y));
                if elements.len() > cap {
                    break;
                }
            }
            if elements.len() > cap {
                break;
            }
        }
        frontier = next;
    }
    BasisCandidate::new(elements, labels, vec![])
}

/// Plain-text table: label, filtration level and leading quotient coordinates.
pub fn render_table(candidate: &BasisCandidate, filt: &Filtration) -> String {
    let field = candidate.algebra().field();
    let width = candidate.labels().iter().map(|l| l.chars().count()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  level  leading coordinates\n", "label");
    for (l, e) in candidate.labels().iter().zip(candidate.elements()) {
        let (level, coords) = match leading_quotient(e, filt) {
            Ok((k, c)) => (k.to_string(), c.iter().map(|&s| field.display(s)).collect::<Vec<_>>().join(" ")),
            Err(_) => ("zero".into(), String::new()),
        };
        let _ = writeln!(out, "{l:<width$}  {level:>5}  [{coords}]");
    }
    out
}
