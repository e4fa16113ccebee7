//! Request handling behind the `fmb` binary. Every command builds a typed
//! report, wraps it in an [`Envelope`] and renders it as JSON or as a plain
//! table; the exit code separates mathematical outcomes from errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use fmbasis::fmb::{self, CandidateReport, FmbError};
use fmbasis::galg::{DimensionSubgroupReport, ExprError, FiltrationReport};
use fmbasis::grp::GroupReport;
use fmbasis::search::{self, Certificate, OracleReport, SearchError};
use fmbasis::{
    build_group, compute_filtration, parse_element, verify, AlgebraError, BasisCandidate, ConstructParams, Construction,
    Field, FieldError, FieldSpec, Filtration, GroupAlgebra, GroupError, GroupSpec, Scalar, SearchConfig, SearchReport,
    Strategy, VerificationReport,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// Verification failed, nonexistence confirmed, or strategies disagree.
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Basis(#[from] FmbError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("bad scalar {text:?}: {reason}")]
    Scalar { text: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        CliError::Scalar { text: String::new(), reason: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GroupInfo,
    Filtration,
    Verify,
    Construct,
    Search,
    OracleCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GroupInfo => "group-info",
            Command::Filtration => "filtration",
            Command::Verify => "verify",
            Command::Construct => "construct",
            Command::Search => "search",
            Command::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "table" => Ok(OutputFormat::Table),
            _ => Err(format!("unknown output format {s:?} (expected json or table)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub strategy: Strategy,
    pub shard: (usize, usize),
    pub record_all: bool,
    pub budget: Option<u64>,
    pub jobs: usize,
    pub time_limit: Option<Duration>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { strategy: Strategy::Structured, shard: (0, 1), record_all: false, budget: None, jobs: 1, time_limit: None }
    }
}

/// One invocation. `field` defaults to the prime field of the group's characteristic.
#[derive(Clone, Debug)]
pub struct RunRequest {
    pub command: Command,
    pub group: Option<String>,
    pub field: Option<String>,
    pub output: OutputFormat,
    pub basis: Option<PathBuf>,
    pub construct: Option<String>,
    pub mu: Option<(String, String)>,
    pub omega: Option<String>,
    pub search: SearchOptions,
}

impl RunRequest {
    pub fn new(command: Command, group: &str, field: &str) -> Self {
        RunRequest {
            command,
            group: Some(group.to_string()),
            field: Some(field.to_string()),
            output: OutputFormat::Json,
            basis: None,
            construct: None,
            mu: None,
            omega: None,
            search: SearchOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub stdout: String,
}

/// Common wrapper of every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: Command,
    pub group: Option<GroupSpec>,
    pub field: Option<FieldSpec>,
    pub exit_code: i32,
    pub report: T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInfoReport {
    pub group: GroupReport,
    pub element_orders: Vec<usize>,
    pub abelian: bool,
    pub derived_subgroup: Vec<usize>,
    /// `[b, a] = b a b⁻¹ a⁻¹` for two-generator groups.
    pub commutator_ba: Option<usize>,
    pub jennings_series_orders: Vec<usize>,
}

/// A quoted value of `dim I^j / I^{j+1}` next to the computed one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub j: usize,
    pub expected: usize,
    pub computed: usize,
    pub discrepancy: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiltrationInfo {
    pub filtration: FiltrationReport,
    pub jennings_quotient_dims: Vec<usize>,
    pub jennings_match: bool,
    pub dimension_subgroups: Vec<DimensionSubgroupReport>,
    pub commutator_ba: Option<usize>,
    pub commutator_in_d2: Option<bool>,
    pub reference_values: Vec<ReferenceValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub candidate: CandidateReport,
    pub verification: VerificationReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructOutput {
    pub construction: Construction,
    pub candidate: CandidateReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutput {
    pub search: SearchReport,
    pub certificate: Option<Certificate>,
}

/// Parses `i/N`.
pub fn parse_shard(s: &str) -> Result<(usize, usize), String> {
    let (i, n) = s.split_once('/').ok_or_else(|| format!("shard {s:?} is not of the form i/N"))?;
    let i: usize = i.trim().parse().map_err(|_| format!("bad shard index in {s:?}"))?;
    let n: usize = n.trim().parse().map_err(|_| format!("bad shard count in {s:?}"))?;
    if n == 0 || i >= n {
        return Err(format!("shard {i}/{n} is out of range"));
    }
    Ok((i, n))
}

/// Values of `dim I^j/I^{j+1}` quoted for catalog groups.
pub fn reference_quotient_dims(spec: &GroupSpec) -> Vec<(usize, usize)> {
    match spec {
        GroupSpec::Quaternion8 => (1..=4).map(|j| (j, 2)).collect(),
        GroupSpec::Example16 => vec![(2, 3)],
        _ => match spec.metacyclic_params() {
            // nonabelian 2-groups with r ≢ 1 mod 4
            Some((2, n, m, _, r)) if r % 4 == 3 && n >= 2 => {
                if m > 1 {
                    vec![(2, 3)]
                } else {
                    vec![(2, 2)]
                }
            }
            _ => vec![],
        },
    }
}

struct Context {
    spec: GroupSpec,
    kg: Arc<GroupAlgebra>,
}

fn context(group: &str, field: Option<&str>) -> Result<Context, CliError> {
    let spec: GroupSpec = group.parse()?;
    let g = build_group(&spec)?;
    let fspec: FieldSpec = match field {
        Some(f) => f.parse()?,
        None => fmbasis::make_field(g.prime() as u64, 1)?,
    };
    let kg = GroupAlgebra::new(Arc::new(g), Arc::new(Field::from_spec(fspec)));
    Ok(Context { spec, kg })
}

fn parse_scalar(kg: &Arc<GroupAlgebra>, text: &str) -> Result<Scalar, CliError> {
    let bad = |reason: String| CliError::Scalar { text: text.to_string(), reason };
    let x = parse_element(kg, text).map_err(|e| bad(e.to_string()))?;
    let c = x.coeffs();
    if c[1..].iter().any(|s| !s.is_zero()) {
        return Err(bad("not a field element".into()));
    }
    Ok(c[0])
}

fn construct_params(kg: &Arc<GroupAlgebra>, req: &RunRequest) -> Result<ConstructParams, CliError> {
    let mu = match &req.mu {
        Some((a, b)) => Some((parse_scalar(kg, a)?, parse_scalar(kg, b)?)),
        None => None,
    };
    let omega = req.omega.as_deref().map(|w| parse_scalar(kg, w)).transpose()?;
    Ok(ConstructParams { mu, omega })
}

/// Reads a bare candidate, a `construct`/`verify` envelope, or a `search`
/// envelope holding exactly one basis.
pub fn load_candidate(path: &PathBuf) -> Result<CandidateReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let json = |source| CliError::Json { path: path.clone(), source };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(json)?;
    let inner = match value.get("report") {
        None => value,
        Some(r) => {
            if let Some(c) = r.get("candidate") {
                c.clone()
            } else if let Some(found) = r.get("search").and_then(|s| s.get("found")).and_then(|f| f.as_array()) {
                match found.as_slice() {
                    [one] => one.clone(),
                    _ => return Err(CliError::Usage(format!("{}: search report holds {} bases, expected one", path.display(), found.len()))),
                }
            } else {
                return Err(CliError::Usage(format!("{}: report holds no candidate basis", path.display())));
            }
        }
    };
    serde_json::from_value(inner).map_err(json)
}

fn emit<T: Serialize>(req: &RunRequest, ctx: Option<&Context>, exit_code: i32, report: T, table: impl FnOnce() -> String) -> RunOutcome {
    let stdout = match req.output {
        OutputFormat::Json => {
            let env = Envelope {
                schema_version: SCHEMA_VERSION,
                command: req.command,
                group: ctx.map(|c| c.spec.clone()),
                field: ctx.map(|c| c.kg.field().spec().clone()),
                exit_code,
                report,
            };
            let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
            s.push('\n');
            s
        }
        OutputFormat::Table => {
            let mut s = String::new();
            if let Some(c) = ctx {
                let _ = writeln!(s, "group  {}\nfield  {}", c.spec, c.kg.field().spec());
            }
            s.push_str(&table());
            let _ = writeln!(s, "exit   {exit_code}");
            s
        }
    };
    RunOutcome { exit_code, stdout }
}

pub fn run(req: &RunRequest) -> RunOutcome {
    match dispatch(req) {
        Ok(out) => out,
        Err(e) => {
            let msg = e.to_string();
            emit(req, None, EXIT_ERROR, ErrorReport { error: msg.clone() }, || format!("error  {msg}\n"))
        }
    }
}

fn require_group(req: &RunRequest) -> Result<&str, CliError> {
    req.group.as_deref().ok_or_else(|| CliError::Usage(format!("{} needs --group", req.command.name())))
}

fn dispatch(req: &RunRequest) -> Result<RunOutcome, CliError> {
    match req.command {
        Command::GroupInfo => group_info(req),
        Command::Filtration => filtration(req),
        Command::Verify => verify_cmd(req),
        Command::Construct => construct_cmd(req),
        Command::Search => search_cmd(req),
        Command::OracleCheck => oracle_cmd(req),
    }
}

fn group_info(req: &RunRequest) -> Result<RunOutcome, CliError> {
    let ctx = context(require_group(req)?, req.field.as_deref())?;
    let g = ctx.kg.group();
    let commutator_ba = g.gen_a().zip(g.gen_b()).map(|(a, b)| g.commutator(b, a));
    let report = GroupInfoReport {
        group: GroupReport::from(g.as_ref()),
        element_orders: (0..g.order()).map(|x| g.element_order(x)).collect(),
        abelian: g.is_abelian(),
        derived_subgroup: g.derived_subgroup(),
        commutator_ba,
        jennings_series_orders: g.jennings_series().iter().map(Vec::len).collect(),
    };
    let table = || {
        let mut s = String::new();
        let _ = writeln!(s, "order  {}", report.group.order);
        let _ = writeln!(s, "abelian  {}", report.abelian);
        let names: Vec<&str> = report.group.generators.iter().map(|&x| g.label(x)).collect();
        let _ = writeln!(s, "generators  {}", names.join(" "));
        let _ = writeln!(s, "derived subgroup  {}", labels_of(g, &report.derived_subgroup));
        if let Some(c) = report.commutator_ba {
            let _ = writeln!(s, "[b,a]  {}", g.label(c));
        }
        let _ = writeln!(s, "jennings series orders  {:?}", report.jennings_series_orders);
        let width = report.group.labels.iter().map(|l| l.len()).max().unwrap_or(1);
        let _ = writeln!(s, "element orders");
        for (l, o) in report.group.labels.iter().zip(&report.element_orders) {
            let _ = writeln!(s, "  {l:<width$}  {o}");
        }
        let _ = writeln!(s, "multiplication table");
        for row in &report.group.table {
            let cells: Vec<String> = row.iter().map(|&x| format!("{:>width$}", g.label(x as usize))).collect();
            let _ = writeln!(s, "  {}", cells.join(" "));
        }
        s
    };
    Ok(emit(req, Some(&ctx), EXIT_OK, report.clone(), table))
}

fn labels_of(g: &fmbasis::Group, xs: &[usize]) -> String {
    xs.iter().map(|&x| g.label(x)).collect::<Vec<_>>().join(" ")
}

fn filtration_info(ctx: &Context, filt: &Filtration) -> FiltrationInfo {
    let g = ctx.kg.group();
    let quotient = filt.quotient_dims();
    let jennings = g.jennings_quotient_dims();
    let commutator_ba = g.gen_a().zip(g.gen_b()).map(|(a, b)| g.commutator(b, a));
    let d2 = (filt.length() > 2).then(|| filt.dimension_subgroup(2));
    FiltrationInfo {
        filtration: filt.report(),
        jennings_match: jennings == quotient,
        jennings_quotient_dims: jennings,
        dimension_subgroups: (1..filt.length()).map(|n| filt.dimension_subgroup(n)).collect(),
        commutator_in_d2: commutator_ba.map(|c| d2.as_ref().map_or(c == 0, |d| d.members.contains(&c))),
        commutator_ba,
        reference_values: reference_quotient_dims(&ctx.spec)
            .into_iter()
            .map(|(j, expected)| {
                let computed = quotient.get(j).copied().unwrap_or(0);
                ReferenceValue { j, expected, computed, discrepancy: expected != computed }
            })
            .collect(),
    }
}

fn filtration(req: &RunRequest) -> Result<RunOutcome, CliError> {
    let ctx = context(require_group(req)?, req.field.as_deref())?;
    let filt = compute_filtration(&ctx.kg)?;
    let info = filtration_info(&ctx, &filt);
    let g = ctx.kg.group().clone();
    let table = || {
        let mut s = String::from("k  dim I^k  dim I^k/I^(k+1)  jennings  D_k\n");
        let dims = &info.filtration.dims;
        for (k, dim) in dims.iter().enumerate() {
            let q = info.filtration.quotient_dims.get(k).map_or("-".into(), ToString::to_string);
            let j = info.jennings_quotient_dims.get(k).map_or("-".into(), ToString::to_string);
            let d = if k == 0 { String::new() } else { info.dimension_subgroups.get(k - 1).map_or(String::new(), |d| labels_of(&g, &d.members)) };
            let _ = writeln!(s, "{k}  {dim}  {q}  {j}  {d}");
        }
        let _ = writeln!(s, "sum of quotient dims  {}", info.filtration.quotient_dims.iter().sum::<usize>());
        let _ = writeln!(s, "jennings match  {}", info.jennings_match);
        if let (Some(c), Some(inside)) = (info.commutator_ba, info.commutator_in_d2) {
            let _ = writeln!(s, "[b,a] = {} in D_2  {inside}", g.label(c));
        }
        for r in &info.reference_values {
            let flag = if r.discrepancy { "  DISCREPANCY" } else { "" };
            let _ = writeln!(s, "reference dim I^{}/I^{}  expected {}  computed {}{flag}", r.j, r.j + 1, r.expected, r.computed);
        }
        s
    };
    Ok(emit(req, Some(&ctx), EXIT_OK, info.clone(), table))
}

/// The candidate named by `--basis` or `--construct`, in the request's algebra.
fn candidate(req: &RunRequest) -> Result<(Context, BasisCandidate), CliError> {
    match (&req.basis, &req.construct) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --basis or --construct, not both".into())),
        (Some(path), None) => {
            let report = load_candidate(path)?;
            let group = match &req.group {
                Some(g) => {
                    let spec: GroupSpec = g.parse()?;
                    if spec != report.group {
                        return Err(CliError::Usage(format!("basis file is for {}, not {spec}", report.group)));
                    }
                    g.clone()
                }
                None => report.group.to_string(),
            };
            if let Some(f) = &req.field {
                let spec: FieldSpec = f.parse()?;
                if spec != report.field {
                    return Err(CliError::Usage(format!("basis file is over {}, not {spec}", report.field)));
                }
            }
            let ctx = context(&group, Some(&report.field.to_string()))?;
            let b = BasisCandidate::from_report_in(&ctx.kg, &report)?;
            Ok((ctx, b))
        }
        (None, Some(name)) => {
            let ctx = context(require_group(req)?, req.field.as_deref())?;
            let which: Construction = name.parse()?;
            let params = construct_params(&ctx.kg, req)?;
            let b = fmbasis::construct(&ctx.kg, which, &params)?;
            Ok((ctx, b))
        }
        (None, None) => Err(CliError::Usage(format!("{} needs --basis <file> or --construct <name>", req.command.name()))),
    }
}

fn verify_cmd(req: &RunRequest) -> Result<RunOutcome, CliError> {
    let (ctx, b) = candidate(req)?;
    let filt = compute_filtration(&ctx.kg)?;
    let report = verify(&b, Some(&filt))?;
    let out = VerifyOutput { candidate: b.to_report()?, verification: report };
    let code = if out.verification.passed() { EXIT_OK } else { EXIT_NEGATIVE };
    let table = || {
        let mut s = format!("verdict  {:?}\n", out.verification.verdict);
        for c in &out.verification.checks {
            let kind = if c.informational { " (informational)" } else { "" };
            let mark = if c.passed { "ok" } else { "FAIL" };
            let _ = writeln!(s, "{:<26} {mark:<4} {}{kind}", c.name, c.detail);
        }
        if let Some(w) = &out.verification.witness {
            let _ = writeln!(s, "witness  {}", serde_json::to_string(w).unwrap_or_default());
        }
        s.push_str(&fmb::render_table(&b, &filt));
        s
    };
    Ok(emit(req, Some(&ctx), code, out.clone(), table))
}

fn construct_cmd(req: &RunRequest) -> Result<RunOutcome, CliError> {
    if req.basis.is_some() {
        return Err(CliError::Usage("construct takes --construct <name>, not --basis".into()));
    }
    let req_named = RunRequest { construct: Some(req.construct.clone().unwrap_or_else(|| "auto".into())), ..req.clone() };
    let (ctx, b) = candidate(&req_named)?;
    let construction: Construction = req_named.construct.as_deref().unwrap().parse()?;
    let filt = compute_filtration(&ctx.kg)?;
    let out = ConstructOutput { construction, candidate: b.to_report()? };
    let table = || {
        let mut s = String::new();
        for (name, value) in b.params() {
            let _ = writeln!(s, "{name}  {}", ctx.kg.field().display(*value));
        }
        s.push_str(&fmb::render_table(&b, &filt));
        s
    };
    Ok(emit(req, Some(&ctx), EXIT_OK, out.clone(), table))
}

fn search_cmd(req: &RunRequest) -> Result<RunOutcome, CliError> {
    let ctx = context(require_group(req)?, req.field.as_deref())?;
    let o = &req.search;
    let mut cfg = SearchConfig {
        strategy: o.strategy,
        shard: o.shard,
        record_all: o.record_all,
        jobs: o.jobs.max(1),
        time_limit: o.time_limit,
        ..SearchConfig::default()
    };
    if let Some(b) = o.budget {
        cfg.budget = b;
    }
    let filt = compute_filtration(&ctx.kg)?;
    let report = fmbasis::search_fmb(&ctx.kg, &cfg, Some(&filt))?;
    let code = if !report.found.is_empty() {
        EXIT_OK
    } else if report.confirms_nonexistence() {
        EXIT_NEGATIVE
    } else {
        EXIT_ERROR
    };
    let out = SearchOutput { certificate: report.certificate(), search: report };
    let table = || {
        let r = &out.search;
        let mut s = String::new();
        let _ = writeln!(s, "strategy  {}  shard {}/{}  version {}", r.strategy, r.shard.0, r.shard.1, r.enumeration_version);
        let _ = writeln!(s, "space  {}  shard space  {}  examined  {}", r.space_size, r.shard_space_size, r.examined);
        let _ = writeln!(s, "nodes  {}  leaves  {}  rejected leaves  {}", r.nodes, r.leaves, r.rejected_leaves);
        let _ = writeln!(s, "pruned  dependent {}  overflow {}  underfull {}", r.pruned.dependent, r.pruned.overflow, r.pruned.underfull);
        for (rule, hist) in &r.pruned_by_depth {
            let _ = writeln!(s, "pruned by depth  {rule}  {hist:?}");
        }
        let _ = writeln!(s, "exhausted  {}  elapsed  {} ms", r.exhausted, r.elapsed_ms);
        let _ = writeln!(s, "found  {}", r.found.len());
        if out.certificate.is_some() {
            let _ = writeln!(s, "nonexistence certificate  space {} examined {} found 0", r.space_size, r.examined);
        }
        for (i, c) in r.found.iter().enumerate() {
            let _ = writeln!(s, "basis {i}");
            match BasisCandidate::from_report_in(&ctx.kg, c) {
                Ok(b) => s.push_str(&fmb::render_table(&b, &filt)),
                Err(e) => {
                    let _ = writeln!(s, "  unreadable: {e}");
                }
            }
        }
        s
    };
    Ok(emit(req, Some(&ctx), code, out.clone(), table))
}

fn oracle_cmd(req: &RunRequest) -> Result<RunOutcome, CliError> {
    let ctx = context(require_group(req)?, req.field.as_deref())?;
    let report: OracleReport = search::oracle_equivalence(&ctx.kg)?;
    let code = if report.equivalent { EXIT_OK } else { EXIT_NEGATIVE };
    let table = || {
        format!(
            "equivalent  {}\nstructured  {} bases  exhausted {}\nbrute_pairs  {} bases  exhausted {}\n",
            report.equivalent,
            report.structured.len(),
            report.structured_exhausted,
            report.brute_pairs.len(),
            report.brute_exhausted
        )
    };
    Ok(emit(req, Some(&ctx), code, report.clone(), table))
}
