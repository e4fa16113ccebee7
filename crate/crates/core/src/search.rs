//! Exhaustive search for filtered multiplicative bases.
//!
//! A basis of KG has one member outside `I`; some power of it is 1, so that
//! member is 1. Moreover `B ∩ I` is the set of nonzero words in the `d = dim I/I²`
//! members lying in `I \ I²`. The structured strategy therefore enumerates
//! generator tuples `(u₁, …, u_d)`:
//!
//! * the classes mod `I²` form an invertible `d × d` frame against the
//!   canonical basis of `I/I²`;
//! * the remaining coordinates, one filtration level at a time, range over
//!   the canonical bases of `I^ℓ/I^{ℓ+1}` for `ℓ ≥ 2`.
//!
//! After fixing coordinates through level ℓ the generators are known modulo
//! `I^{ℓ+1}`. In a valid basis the images of the words there are exactly the
//! images of `B ∩ I \ I^{ℓ+1}`, so they must be independent and number
//! `dim I − dim I^{ℓ+1}`. Any node violating this is pruned with its subtree.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::Scalar;
use crate::fmb::{verify, BasisCandidate, CandidateReport, FmbError};
use crate::galg::{compute_filtration, AlgebraError, Filtration, GroupAlgebra};
use crate::linalg::EchelonBasis;

/// Tag identifying the enumeration order, so certificates can be replayed.
pub const ENUMERATION_VERSION: &str = "levelwise-frames-v1";
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_MAX_ORDER: usize = 16;
pub const BRUTE_MAX_ORDER: usize = 8;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("strategy {strategy} does not support {reason}")]
    Unsupported { strategy: Strategy, reason: String },
    #[error("shard {index}/{count} is invalid")]
    Shard { index: usize, count: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Basis(#[from] FmbError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Structured,
    BrutePairs,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Structured => "structured",
            Strategy::BrutePairs => "brute_pairs",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "structured" => Ok(Strategy::Structured),
            "brute_pairs" | "brute-pairs" => Ok(Strategy::BrutePairs),
            _ => Err(format!("unknown strategy {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub shard: (usize, usize),
    /// Maximum number of closure attempts.
    pub budget: u64,
    pub time_limit: Option<Duration>,
    pub record_all: bool,
    pub jobs: usize,
    pub max_order: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            strategy: Strategy::Structured,
            shard: (0, 1),
            budget: DEFAULT_BUDGET,
            time_limit: None,
            record_all: false,
            jobs: 1,
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneCounts {
    pub dependent: u64,
    pub overflow: u64,
    pub underfull: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub strategy: Strategy,
    pub shard: (usize, usize),
    pub enumeration_version: String,
    /// Size of the whole enumeration space (all shards).
    pub space_size: u128,
    /// Size of this shard's part of the space.
    pub shard_space_size: u128,
    /// Tuples covered, counting every tuple inside a pruned subtree.
    pub examined: u128,
    /// Closure attempts.
    pub nodes: u64,
    pub leaves: u64,
    pub pruned: PruneCounts,
    /// Pruned nodes per rule, indexed by filtration depth.
    pub pruned_by_depth: BTreeMap<String, Vec<u64>>,
    /// Full-size closures that failed verification (expected to stay 0).
    pub rejected_leaves: u64,
    pub found: Vec<CandidateReport>,
    pub exhausted: bool,
    pub elapsed_ms: u128,
}

impl SearchReport {
    /// True when the whole shard was covered without finding a basis.
    pub fn confirms_nonexistence(&self) -> bool {
        self.exhausted && self.found.is_empty()
    }

    pub fn certificate(&self) -> Option<Certificate> {
        self.confirms_nonexistence().then(|| Certificate {
            enumeration_version: self.enumeration_version.clone(),
            strategy: self.strategy,
            shard: self.shard,
            space_size: self.space_size,
            shard_space_size: self.shard_space_size,
            examined: self.examined,
            exhausted: true,
            found: vec![],
        })
    }
}

/// Nonexistence certificate for one shard of a stated parameterization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub enumeration_version: String,
    pub strategy: Strategy,
    pub shard: (usize, usize),
    pub space_size: u128,
    pub shard_space_size: u128,
    pub examined: u128,
    pub exhausted: bool,
    pub found: Vec<CandidateReport>,
}

/// Sorts members by (filtration level, coefficient vector), relabels them
/// `b0, b1, …` and drops construction parameters, so equal sets serialize equally.
pub fn canonicalize(candidate: &BasisCandidate, filt: &Filtration) -> BasisCandidate {
    let mut members: Vec<_> = candidate
        .elements()
        .iter()
        .map(|e| (filt.filtration_level(e), e.coeffs().to_vec(), e.clone()))
        .collect();
    members.sort_by(|x, y| (x.0, &x.1).cmp(&(y.0, &y.1)));
    let labels = (0..members.len()).map(|i| format!("b{i}")).collect();
    BasisCandidate::new(members.into_iter().map(|m| m.2).collect(), labels, vec![])
        .expect("relabelling keeps the candidate valid")
}

fn canonical_key(candidate: &BasisCandidate) -> Vec<Vec<Scalar>> {
    candidate.elements().iter().map(|e| e.coeffs().to_vec()).collect()
}

/// Everything the search needs about `KG`, computed once.
struct Space {
    kg: Arc<GroupAlgebra>,
    filt: Filtration,
    d: usize,
    /// Last nonzero level.
    top: usize,
    /// Canonical quotient bases, indexed by level.
    qbases: Vec<Vec<Vec<Scalar>>>,
    /// `dim I − dim I^{ℓ+1}`, indexed by ℓ.
    targets: Vec<usize>,
    /// `d · dim I^{ℓ+1}`, the number of free coordinates below level ℓ.
    below: Vec<u32>,
    frames: Vec<Vec<Scalar>>,
    q: u128,
    elements: Vec<Scalar>,
}

impl Space {
    fn new(kg: &Arc<GroupAlgebra>, filt: Option<&Filtration>) -> Result<Space, SearchError> {
        let filt = match filt {
            Some(f) => f.clone(),
            None => compute_filtration(kg)?,
        };
        let top = filt.length().saturating_sub(1);
        let dims = filt.dims();
        let d = dims.get(1).copied().unwrap_or(0) - dims.get(2).copied().unwrap_or(0);
        let qbases = (0..=top).map(|l| filt.quotient_basis(l)).collect();
        let targets = (0..=top).map(|l| dims[1] - filt.level(l + 1).rank()).collect();
        let below = (0..=top).map(|l| (d * filt.level(l + 1).rank()) as u32).collect();
        let field = kg.field();
        let elements: Vec<Scalar> = field.elements().collect();
        let frames = invertible_matrices(field, d);
        Ok(Space { kg: Arc::clone(kg), filt, d, top, qbases, targets, below, frames, q: field.order() as u128, elements })
    }

    fn space_size(&self) -> u128 {
        self.frames.len() as u128 * self.q.pow(self.below[1])
    }

    /// Generator images after adding level-ℓ coordinates `digits` (generator-major).
    fn extend(&self, base: &[Vec<Scalar>], level: usize, digits: &[usize]) -> Vec<Vec<Scalar>> {
        let field = self.kg.field();
        let rows = &self.qbases[level];
        let per = rows.len();
        base.iter()
            .enumerate()
            .map(|(i, g)| {
                let mut g = g.clone();
                for (j, row) in rows.iter().enumerate() {
                    let c = self.elements[digits[i * per + j]];
                    if c.is_zero() {
                        continue;
                    }
                    for (x, &r) in g.iter_mut().zip(row) {
                        if !r.is_zero() {
                            *x = field.add(*x, field.mul(c, r));
                        }
                    }
                }
                g
            })
            .collect()
    }

    /// Closure of the generators' words modulo `I^{level+1}`.
    fn check(&self, gens: &[Vec<Scalar>], level: usize) -> Result<(), Prune> {
        let kg = &self.kg;
        let field = kg.field();
        let target = self.targets[level];
        let mut basis = EchelonBasis::new(kg.dim());
        let mut seen: HashSet<Vec<Scalar>> = HashSet::new();
        let mut frontier: Vec<Vec<Scalar>> = Vec::new();
        let mut admit = |v: Vec<Scalar>, basis: &mut EchelonBasis, frontier: &mut Vec<Vec<Scalar>>| {
            if v.iter().all(|s| s.is_zero()) || seen.contains(&v) {
                return Ok(());
            }
            if !basis.insert(field, v.clone()) {
                return Err(Prune::Dependent);
            }
            if basis.rank() > target {
                return Err(Prune::Overflow);
            }
            seen.insert(v.clone());
            frontier.push(v);
            Ok(())
        };
        for g in gens {
            let mut v = g.clone();
            self.filt.reduce_mod(level + 1, &mut v);
            admit(v, &mut basis, &mut frontier)?;
        }
        while let Some(x) = frontier.pop() {
            for g in gens {
                let mut y = kg.mul_raw(&x, g);
                self.filt.reduce_mod(level + 1, &mut y);
                admit(y, &mut basis, &mut frontier)?;
            }
        }
        if basis.rank() < target {
            return Err(Prune::Underfull);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
enum Prune {
    Dependent,
    Overflow,
    Underfull,
}

fn invertible_matrices(field: &crate::ff::Field, d: usize) -> Vec<Vec<Scalar>> {
    let q = field.order() as usize;
    let total = q.checked_pow((d * d) as u32).expect("frame count fits in usize");
    let elements: Vec<Scalar> = field.elements().collect();
    (0..total)
        .filter_map(|mut idx| {
            let mut m = vec![Scalar::ZERO; d * d];
            for slot in m.iter_mut().rev() {
                *slot = elements[idx % q];
                idx /= q;
            }
            let rows: Vec<&[Scalar]> = m.chunks(d).collect();
            (EchelonBasis::span(field, d, rows).rank() == d).then_some(m)
        })
        .collect()
}

/// Per-frame tallies, folded in frame order.
#[derive(Clone, Debug, Default)]
struct Tally {
    examined: u128,
    nodes: u64,
    leaves: u64,
    rejected: u64,
    pruned: PruneCounts,
    by_depth: BTreeMap<&'static str, Vec<u64>>,
    found: Vec<BasisCandidate>,
    aborted: bool,
}

impl Tally {
    fn absorb(&mut self, other: Tally) {
        self.examined += other.examined;
        self.nodes += other.nodes;
        self.leaves += other.leaves;
        self.rejected += other.rejected;
        self.pruned.dependent += other.pruned.dependent;
        self.pruned.overflow += other.pruned.overflow;
        self.pruned.underfull += other.pruned.underfull;
        for (k, v) in other.by_depth {
            let slot = self.by_depth.entry(k).or_default();
            if slot.len() < v.len() {
                slot.resize(v.len(), 0);
            }
            for (a, b) in slot.iter_mut().zip(v) {
                *a += b;
            }
        }
        self.found.extend(other.found);
        self.aborted |= other.aborted;
    }
}

struct Limits<'a> {
    budget: u64,
    deadline: Option<Instant>,
    nodes: &'a AtomicU64,
    stop: &'a AtomicBool,
}

impl Limits<'_> {
    fn exceeded(&self) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return true;
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over = n > self.budget || (n.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() >= d));
        if over {
            self.stop.store(true, Ordering::Relaxed);
        }
        over
    }
}

struct Walker<'a> {
    space: &'a Space,
    limits: &'a Limits<'a>,
    record_all: bool,
    tally: Tally,
    seen: HashSet<Vec<Vec<Scalar>>>,
}

impl Walker<'_> {
    /// Returns false to stop the walk (budget hit, or first basis found).
    fn descend(&mut self, gens: Vec<Vec<Scalar>>, level: usize) -> bool {
        if self.limits.exceeded() {
            self.tally.aborted = true;
            return false;
        }
        self.tally.nodes += 1;
        let sp = self.space;
        if let Err(rule) = sp.check(&gens, level) {
            self.tally.examined += sp.q.pow(sp.below[level]);
            let (name, counter) = match rule {
                Prune::Dependent => ("dependent", &mut self.tally.pruned.dependent),
                Prune::Overflow => ("overflow", &mut self.tally.pruned.overflow),
                Prune::Underfull => ("underfull", &mut self.tally.pruned.underfull),
            };
            *counter += 1;
            let hist = self.tally.by_depth.entry(name).or_insert_with(|| vec![0; sp.top + 1]);
            hist[level] += 1;
            return true;
        }
        if level == sp.top {
            self.tally.examined += 1;
            self.tally.leaves += 1;
            return self.leaf(gens);
        }
        let next = level + 1;
        let width = sp.d * sp.qbases[next].len();
        let q = sp.q as usize;
        let mut digits = vec![0usize; width];
        loop {
            if !self.descend(sp.extend(&gens, next, &digits), next) {
                return false;
            }
            // increment, last coordinate fastest
            let mut i = width;
            loop {
                if i == 0 {
                    return true;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < q {
                    break;
                }
                digits[i] = 0;
            }
        }
    }

    fn leaf(&mut self, gens: Vec<Vec<Scalar>>) -> bool {
        let sp = self.space;
        let b = match closure_basis(&sp.kg, &gens, sp.kg.dim()) {
            Ok(Some(b)) => b,
            _ => {
                self.tally.rejected += 1;
                return true;
            }
        };
        // generator permutations reach the same set; verify each set once
        let mut key: Vec<Vec<Scalar>> = b.elements().iter().map(|e| e.coeffs().to_vec()).collect();
        key.sort();
        if !self.seen.insert(key) {
            return self.record_all;
        }
        match verify(&b, Some(&sp.filt)) {
            Ok(r) if r.passed() => {
                self.tally.found.push(canonicalize(&b, &sp.filt));
                self.record_all
            }
            _ => {
                self.tally.rejected += 1;
                true
            }
        }
    }
}

/// `{1} ∪` nonzero words in `gens` when it has exactly `size` members.
fn closure_basis(kg: &Arc<GroupAlgebra>, gens: &[Vec<Scalar>], size: usize) -> Result<Option<BasisCandidate>, FmbError> {
    const NAMES: [&str; 6] = ["u", "v", "w", "x", "y", "z"];
    let named: Vec<(String, crate::galg::AlgebraElement)> = gens
        .iter()
        .enumerate()
        .filter(|(_, g)| g.iter().any(|s| !s.is_zero()))
        .map(|(i, g)| Ok((NAMES.get(i).map_or_else(|| format!("g{i}"), |n| n.to_string()), kg.from_coeffs(g.clone())?)))
        .collect::<Result<_, FmbError>>()?;
    let b = crate::fmb::word_closure_candidate(kg, &named, size)?;
    Ok((b.len() == size).then_some(b))
}

fn structured(kg: &Arc<GroupAlgebra>, cfg: &SearchConfig, filt: Option<&Filtration>) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let order = kg.dim();
    if order > cfg.max_order {
        return Err(SearchError::Unsupported {
            strategy: Strategy::Structured,
            reason: format!("groups of order {order} (limit {})", cfg.max_order),
        });
    }
    if order < 2 {
        return Err(SearchError::Unsupported { strategy: Strategy::Structured, reason: "the trivial group".into() });
    }
    let space = Space::new(kg, filt)?;
    let (index, count) = cfg.shard;
    let frames: Vec<usize> = (0..space.frames.len()).filter(|f| f % count == index).collect();
    let per_frame = space.q.pow(space.below[1]);
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let limits = Limits { budget: cfg.budget, deadline: cfg.time_limit.map(|t| start + t), nodes: &nodes, stop: &stop };
    let results: Mutex<Vec<Option<Tally>>> = Mutex::new(vec![None; frames.len()]);
    // earliest frame slot holding a hit, used to skip later frames when stopping at the first basis
    let first_hit = AtomicUsize::new(usize::MAX);
    let next = AtomicUsize::new(0);
    let work = || loop {
        let slot = next.fetch_add(1, Ordering::SeqCst);
        if slot >= frames.len() || stop.load(Ordering::Relaxed) {
            break;
        }
        if !cfg.record_all && slot > first_hit.load(Ordering::SeqCst) {
            continue;
        }
        let m = &space.frames[frames[slot]];
        let d = space.d;
        let base: Vec<Vec<Scalar>> = (0..d).map(|_| vec![Scalar::ZERO; order]).collect();
        let digits: Vec<usize> = m.iter().map(|s| s.index() as usize).collect();
        let gens = space.extend(&base, 1, &digits);
        let mut walker = Walker { space: &space, limits: &limits, record_all: cfg.record_all, tally: Tally::default(), seen: HashSet::new() };
        walker.descend(gens, 1);
        if !walker.tally.found.is_empty() {
            first_hit.fetch_min(slot, Ordering::SeqCst);
        }
        results.lock().unwrap()[slot] = Some(walker.tally);
    };
    let jobs = cfg.jobs.max(1).min(frames.len().max(1));
    if jobs == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(work);
            }
        });
    }
    let mut total = Tally::default();
    let mut complete = true;
    for slot in results.into_inner().unwrap() {
        match slot {
            Some(t) => {
                let hit = !t.found.is_empty();
                total.absorb(t);
                if hit && !cfg.record_all {
                    break;
                }
            }
            None => {
                complete = false;
                break;
            }
        }
    }
    let exhausted = complete && !total.aborted && total.examined == per_frame * frames.len() as u128;
    finish(kg, Strategy::Structured, cfg, &space.filt, space.space_size(), per_frame * frames.len() as u128, total, exhausted, start)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    kg: &Arc<GroupAlgebra>,
    strategy: Strategy,
    cfg: &SearchConfig,
    filt: &Filtration,
    space_size: u128,
    shard_space_size: u128,
    total: Tally,
    exhausted: bool,
    start: Instant,
) -> Result<SearchReport, SearchError> {
    // soundness: re-verify, then dedup canonical forms in a stable order
    let mut unique: BTreeMap<Vec<Vec<Scalar>>, BasisCandidate> = BTreeMap::new();
    let mut order = Vec::new();
    for b in total.found {
        if !verify(&b, Some(filt))?.passed() {
            continue;
        }
        let key = canonical_key(&b);
        if let Entry::Vacant(e) = unique.entry(key.clone()) {
            order.push(key);
            e.insert(b);
        }
    }
    let found = order
        .iter()
        .map(|k| unique[k].to_report())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| match e {
            FmbError::Algebra(a) => SearchError::Algebra(a),
            other => SearchError::Basis(other),
        })?;
    let _ = kg;
    Ok(SearchReport {
        strategy,
        shard: cfg.shard,
        enumeration_version: ENUMERATION_VERSION.into(),
        space_size,
        shard_space_size,
        examined: total.examined,
        nodes: total.nodes,
        leaves: total.leaves,
        pruned: total.pruned,
        pruned_by_depth: total.by_depth.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        rejected_leaves: total.rejected,
        found,
        exhausted,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Every pair `(u, v) ∈ I × I`: `{1} ∪` nonzero words must have `|G|` members and verify.
fn brute_pairs(kg: &Arc<GroupAlgebra>, cfg: &SearchConfig, filt: Option<&Filtration>) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let unsupported = |reason: String| SearchError::Unsupported { strategy: Strategy::BrutePairs, reason };
    if kg.field().order() != 2 {
        return Err(unsupported(format!("field {}", kg.field().spec())));
    }
    if kg.dim() > BRUTE_MAX_ORDER || kg.dim() < 2 {
        return Err(unsupported(format!("groups of order {}", kg.dim())));
    }
    let space = Space::new(kg, filt)?;
    if space.d > 2 {
        return Err(unsupported(format!("{} generators", space.d)));
    }
    let radical = space.filt.level(1).rows().to_vec();
    let n = radical.len();
    let size = 1usize << n;
    let element = |mask: usize| {
        let mut v = vec![Scalar::ZERO; kg.dim()];
        for (i, row) in radical.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v = kg.add_raw(&v, row);
            }
        }
        v
    };
    let members: Vec<Vec<Scalar>> = (0..size).map(element).collect();
    let (index, count) = cfg.shard;
    let mut total = Tally::default();
    let mut aborted = false;
    'outer: for (ui, u) in members.iter().enumerate() {
        if ui % count != index {
            continue;
        }
        for v in &members {
            total.nodes += 1;
            total.examined += 1;
            if total.nodes > cfg.budget || cfg.time_limit.is_some_and(|t| start.elapsed() >= t) {
                aborted = true;
                break 'outer;
            }
            if let Some(b) = closure_basis(kg, &[u.clone(), v.clone()], kg.dim())? {
                total.leaves += 1;
                if verify(&b, Some(&space.filt))?.passed() {
                    total.found.push(canonicalize(&b, &space.filt));
                    if !cfg.record_all {
                        break 'outer;
                    }
                } else {
                    total.rejected += 1;
                }
            }
        }
    }
    let shard_space = (size as u128) * (0..size).filter(|u| u % count == index).count() as u128;
    let exhausted = !aborted && total.examined == shard_space;
    finish(kg, Strategy::BrutePairs, cfg, &space.filt, (size * size) as u128, shard_space, total, exhausted, start)
}

pub fn search_fmb(kg: &Arc<GroupAlgebra>, cfg: &SearchConfig, filt: Option<&Filtration>) -> Result<SearchReport, SearchError> {
    let (index, count) = cfg.shard;
    if count == 0 || index >= count {
        return Err(SearchError::Shard { index, count });
    }
    match cfg.strategy {
        Strategy::Structured => structured(kg, cfg, filt),
        Strategy::BrutePairs => brute_pairs(kg, cfg, filt),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub equivalent: bool,
    pub structured: Vec<CandidateReport>,
    pub brute_pairs: Vec<CandidateReport>,
    pub structured_exhausted: bool,
    pub brute_exhausted: bool,
}

/// Runs both strategies with `record_all` and compares the canonical result sets.
pub fn oracle_equivalence(kg: &Arc<GroupAlgebra>) -> Result<OracleReport, SearchError> {
    let filt = compute_filtration(kg)?;
    let base = SearchConfig { record_all: true, ..SearchConfig::default() };
    let s = search_fmb(kg, &SearchConfig { strategy: Strategy::Structured, ..base.clone() }, Some(&filt))?;
    let b = search_fmb(kg, &SearchConfig { strategy: Strategy::BrutePairs, ..base }, Some(&filt))?;
    let as_set = |r: &SearchReport| -> BTreeSet<Vec<Vec<Vec<u32>>>> {
        r.found.iter().map(|c| c.members.iter().map(|m| m.coeffs.clone()).collect()).collect()
    };
    Ok(OracleReport {
        equivalent: s.exhausted && b.exhausted && as_set(&s) == as_set(&b),
        structured_exhausted: s.exhausted,
        brute_exhausted: b.exhausted,
        structured: s.found,
        brute_pairs: b.found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::Field;
    use crate::fmb::{construct_abelian, construct_dihedral, construct_quaternion8};
    use crate::grp::build_group;

    fn algebra(group: &str, p: u64, k: u32) -> Arc<GroupAlgebra> {
        let g = build_group(&group.parse().unwrap()).unwrap();
        GroupAlgebra::new(Arc::new(g), Arc::new(Field::new(p, k).unwrap()))
    }

    fn run(kg: &Arc<GroupAlgebra>, cfg: SearchConfig) -> SearchReport {
        search_fmb(kg, &cfg, None).unwrap()
    }

    #[test]
    fn frames_are_general_linear_group() {
        let f2 = Field::new(2, 1).unwrap();
        let f3 = Field::new(3, 1).unwrap();
        let f4 = Field::new(2, 2).unwrap();
        // |GL_d(q)| = Π (q^d − q^i)
        assert_eq!(invertible_matrices(&f2, 2).len(), 6);
        assert_eq!(invertible_matrices(&f3, 2).len(), 48);
        assert_eq!(invertible_matrices(&f4, 2).len(), 180);
        assert_eq!(invertible_matrices(&f2, 3).len(), 168);
        assert_eq!(invertible_matrices(&f4, 1).len(), 3);
    }

    #[test]
    fn cyclic_four_finds_power_basis() {
        let kg = algebra("abelian(4)", 2, 1);
        let r = run(&kg, SearchConfig { record_all: true, ..Default::default() });
        assert!(r.exhausted);
        assert_eq!(r.examined, r.space_size);
        let filt = compute_filtration(&kg).unwrap();
        let expected = canonicalize(&construct_abelian(&kg).unwrap(), &filt).to_report().unwrap();
        assert!(r.found.contains(&expected));
    }

    #[test]
    fn quaternion_over_gf2_has_none() {
        let kg = algebra("quaternion8", 2, 1);
        let r = run(&kg, SearchConfig::default());
        assert!(r.confirms_nonexistence());
        assert_eq!(r.space_size, 6 * 2u128.pow(10));
        assert_eq!(r.examined, r.space_size);
        let cert = r.certificate().unwrap();
        assert_eq!(cert.enumeration_version, ENUMERATION_VERSION);
    }

    #[test]
    fn dihedral_hit_verifies_and_matches_construction() {
        let kg = algebra("dihedral(n=2)", 2, 1);
        let r = run(&kg, SearchConfig { record_all: true, ..Default::default() });
        assert!(r.exhausted && !r.found.is_empty());
        let filt = compute_filtration(&kg).unwrap();
        let expected = canonicalize(&construct_dihedral(&kg).unwrap(), &filt).to_report().unwrap();
        assert!(r.found.contains(&expected));
        for c in &r.found {
            assert!(verify(&BasisCandidate::from_report_in(&kg, c).unwrap(), None).unwrap().passed());
        }
    }

    #[test]
    fn shards_partition_the_space() {
        let kg = algebra("quaternion8", 2, 1);
        let full = run(&kg, SearchConfig::default());
        let mut examined = 0;
        let mut shard_space = 0;
        for i in 0..4 {
            let r = run(&kg, SearchConfig { shard: (i, 4), ..Default::default() });
            assert!(r.exhausted);
            examined += r.examined;
            shard_space += r.shard_space_size;
        }
        assert_eq!(examined, full.space_size);
        assert_eq!(shard_space, full.space_size);
    }

    #[test]
    fn parallel_matches_sequential() {
        let kg = algebra("dihedral(n=2)", 2, 1);
        for record_all in [false, true] {
            let mut a = run(&kg, SearchConfig { record_all, ..Default::default() });
            let mut b = run(&kg, SearchConfig { record_all, jobs: 4, ..Default::default() });
            a.elapsed_ms = 0;
            b.elapsed_ms = 0;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let kg = algebra("quaternion8", 2, 1);
        let r = run(&kg, SearchConfig { budget: 10, ..Default::default() });
        assert!(!r.exhausted);
        assert!(r.certificate().is_none());
    }

    #[test]
    fn configuration_errors() {
        let kg = algebra("quaternion8", 2, 1);
        assert!(matches!(
            search_fmb(&kg, &SearchConfig { shard: (2, 2), ..Default::default() }, None),
            Err(SearchError::Shard { .. })
        ));
        let big = algebra("dihedral(n=4)", 2, 1);
        assert!(matches!(search_fmb(&big, &SearchConfig::default(), None), Err(SearchError::Unsupported { .. })));
        let gf4 = algebra("quaternion8", 2, 2);
        let brute = SearchConfig { strategy: Strategy::BrutePairs, ..Default::default() };
        assert!(matches!(search_fmb(&gf4, &brute, None), Err(SearchError::Unsupported { .. })));
        let three = algebra("abelian(2,2,2)", 2, 1);
        assert!(matches!(search_fmb(&three, &brute, None), Err(SearchError::Unsupported { .. })));
    }

    #[test]
    fn canonical_form_is_idempotent_and_order_free() {
        let kg = algebra("dihedral(n=2)", 2, 1);
        let filt = compute_filtration(&kg).unwrap();
        let b = construct_dihedral(&kg).unwrap();
        let once = canonicalize(&b, &filt);
        let twice = canonicalize(&once, &filt);
        assert_eq!(once.to_report().unwrap(), twice.to_report().unwrap());
        let mut els = b.elements().to_vec();
        let mut labels = b.labels().to_vec();
        els.reverse();
        labels.reverse();
        let shuffled = BasisCandidate::new(els, labels, vec![]).unwrap();
        assert_eq!(canonicalize(&shuffled, &filt).to_report().unwrap(), once.to_report().unwrap());
    }

    #[test]
    fn distinct_quaternion_bases_have_distinct_canonical_forms() {
        let kg = algebra("quaternion8", 2, 2);
        let filt = compute_filtration(&kg).unwrap();
        let w = kg.field().primitive_cube_root().unwrap();
        let w2 = kg.field().mul(w, w);
        let x = canonicalize(&construct_quaternion8(&kg, Some(w)).unwrap(), &filt).to_report().unwrap();
        // ω ↔ ω² exchanges u and v, so the set is the same
        let y = canonicalize(&construct_quaternion8(&kg, Some(w2)).unwrap(), &filt).to_report().unwrap();
        assert_eq!(x, y);
        let gens = [
            ("u".to_string(), crate::galg::parse_element(&kg, "(1+a)+w*(1+b)+w^2*(1+a)*(1+b)").unwrap()),
            ("v".to_string(), crate::galg::parse_element(&kg, "(1+a)+w^2*(1+b)+w*(1+a)*(1+b)").unwrap()),
        ];
        let other = crate::fmb::word_closure_candidate(&kg, &gens, 8).unwrap();
        assert!(verify(&other, Some(&filt)).unwrap().passed());
        let z = canonicalize(&other, &filt);
        assert_ne!(x, z.to_report().unwrap());
        assert_eq!(canonicalize(&z, &filt).to_report().unwrap(), z.to_report().unwrap());
    }

    #[test]
    fn oracle_on_small_groups() {
        for g in ["abelian(2)", "abelian(4)", "abelian(2,2)"] {
            let r = oracle_equivalence(&algebra(g, 2, 1)).unwrap();
            assert!(r.equivalent, "{g}");
        }
    }

    #[test]
    fn non_radical_member_is_one() {
        // B has |G| − dim I = 1 member e outside I, a unit λ(1 + r) with r ∈ I.
        // With N = p^k (q − 1) and p^k ≥ L, e^N = λ^N (1 + r^{p^k}) = 1, and
        // powers of members stay in B ∪ {0}; so 1 ∈ B and e = 1.
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for (g, p, k) in [("quaternion8", 2, 2), ("abelian(9)", 3, 1), ("example16", 2, 1)] {
            let kg = algebra(g, p, k);
            let field = kg.field().clone();
            let filt = compute_filtration(&kg).unwrap();
            let mut pk = 1u32;
            while (pk as usize) < filt.length() {
                pk *= p as u32;
            }
            let n = pk * (field.order() - 1);
            for _ in 0..20 {
                let mut e = kg.scalar(field.scalar(rng.gen_range(1..field.order())).unwrap());
                for row in filt.level(1).rows() {
                    let c = field.scalar(rng.gen_range(0..field.order())).unwrap();
                    e = &e + &kg.from_coeffs(row.clone()).unwrap().scale(c).unwrap();
                }
                assert_eq!(e.pow(n), kg.one());
            }
        }
    }
}
