//! Search drivers: iterative perfect search, bounded and sparse MaxSAT
//! search, per-class orchestration, and a brute-force size oracle.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::BinDataset;
use crate::encoder::{
    build_bounded, build_perfect, build_sparse, lam_to_cost, needs_coverage, target_bit,
    CnfBundle, EncodeError, Scope,
};
use crate::model::{decode, verify_perfect, DecisionSet, ModelError, SolverSummary};
use crate::sat::maxsat::{solve_maxsat, MaxSatBudget};
use crate::sat::{MaxSatOutcome, MaxSatStats, SatBackend, SolveResult, Solver};

pub type ProgressFn = Arc<dyn Fn(&RoundRecord) + Send + Sync>;

#[derive(Clone)]
pub struct SearchLimits {
    /// Wall-clock budget of a whole search.
    pub total: Duration,
    /// Budget of a single SAT call.
    pub per_solve: Duration,
    /// Largest node budget tried.
    pub max_n: usize,
    /// Called after every round.
    pub progress: Option<ProgressFn>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            total: Duration::from_secs(600),
            per_solve: Duration::from_secs(60),
            max_n: 64,
            progress: None,
        }
    }
}

impl fmt::Debug for SearchLimits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchLimits")
            .field("total", &self.total)
            .field("per_solve", &self.per_solve)
            .field("max_n", &self.max_n)
            .field("progress", &self.progress.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    /// A decision set was found but not proven optimal.
    Feasible,
    /// No decision set exists within the limits on N.
    Infeasible,
    /// Time ran out before any decision set was found.
    Timeout,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout => "timeout",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundStatus {
    Sat,
    Unsat,
    Optimal,
    Feasible,
    Unknown,
}

/// One solver round: a node budget and what came out of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub scope: Scope,
    pub n: usize,
    pub status: RoundStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<u64>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub solve_calls: u64,
    pub conflicts: u64,
    pub elapsed: Duration,
    pub rounds: Vec<RoundRecord>,
}

impl SearchStats {
    fn absorb(&mut self, other: SearchStats) {
        self.solve_calls += other.solve_calls;
        self.conflicts += other.conflicts;
        self.elapsed = self.elapsed.max(other.elapsed);
        self.rounds.extend(other.rounds);
    }

    pub fn summary(&self) -> SolverSummary {
        SolverSummary {
            solve_calls: self.solve_calls,
            conflicts: self.conflicts,
            elapsed_ms: self.elapsed.as_millis() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub decision_set: Option<DecisionSet>,
    /// Total size (perfect, bounded) or misclassification weight plus node
    /// cost (sparse).
    pub objective: Option<u64>,
    /// Sparse only: node cost `N * cost` dropped from the objective.
    pub objective_offset: u64,
    pub stats: SearchStats,
}

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(
        "dataset contains examples with identical features but different classes; \
         sanitize it first (e.g. --drop-contradictions)"
    )]
    Contradictions,
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid search parameter: {0}")]
    Parameter(String),
    #[error("oracle limited to M <= 8 and K <= 4 (got M = {m}, K = {k})")]
    OracleTooLarge { m: usize, k: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

/// Shared clock of one search.
#[derive(Debug, Clone, Copy)]
struct Clock {
    start: Instant,
    deadline: Instant,
    per_solve: Duration,
}

impl Clock {
    fn new(limits: &SearchLimits) -> Clock {
        let start = Instant::now();
        Clock {
            start,
            deadline: start + limits.total,
            per_solve: limits.per_solve,
        }
    }

    fn call_deadline(&self) -> Instant {
        self.deadline.min(Instant::now() + self.per_solve)
    }

    fn expired(&self) -> bool {
        Instant::now() >= self.deadline
    }

    fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

struct Run<'a> {
    limits: &'a SearchLimits,
    clock: Clock,
    scope: Scope,
    stats: SearchStats,
}

impl<'a> Run<'a> {
    fn new(limits: &'a SearchLimits, clock: Clock, scope: Scope) -> Self {
        Run {
            limits,
            clock,
            scope,
            stats: SearchStats::default(),
        }
    }

    fn record(&mut self, n: usize, status: RoundStatus, cost: Option<u64>) {
        let rec = RoundRecord {
            scope: self.scope,
            n,
            status,
            cost,
            elapsed_ms: self.clock.elapsed().as_millis() as u64,
        };
        if let Some(cb) = &self.limits.progress {
            cb(&rec);
        }
        self.stats.rounds.push(rec);
    }

    fn add_maxsat(&mut self, s: &MaxSatStats) {
        self.stats.solve_calls += s.solve_calls;
        self.stats.conflicts += s.conflicts;
    }

    fn finish(
        mut self,
        status: SolveStatus,
        decision_set: Option<DecisionSet>,
        objective: Option<u64>,
        objective_offset: u64,
    ) -> SolveOutcome {
        self.stats.elapsed = self.clock.elapsed();
        SolveOutcome {
            status,
            decision_set,
            objective,
            objective_offset,
            stats: self.stats,
        }
    }
}

fn check_limits(limits: &SearchLimits) -> Result<(), OptimizeError> {
    if limits.total.is_zero() || limits.per_solve.is_zero() {
        return Err(OptimizeError::Parameter("budgets must be positive".into()));
    }
    if limits.max_n == 0 {
        return Err(OptimizeError::Parameter("max_n must be at least 1".into()));
    }
    Ok(())
}

fn has_scope_examples(ds: &BinDataset, scope: Scope) -> bool {
    (0..ds.len()).any(|i| needs_coverage(ds, scope, i))
}

fn verified(d: DecisionSet, ds: &BinDataset, scope: Scope) -> Result<DecisionSet, OptimizeError> {
    match verify_perfect(&d, ds, scope) {
        Ok(()) => Ok(d),
        Err(v) => Err(OptimizeError::Internal(format!(
            "decoded set fails verification at example {}: {:?}",
            v.example, v.kind
        ))),
    }
}

/// Smallest perfect decision set: solves size 1, 2, 3, ... until SAT.
pub fn minimize_perfect(
    ds: &BinDataset,
    scope: Scope,
    limits: &SearchLimits,
) -> Result<SolveOutcome, OptimizeError> {
    perfect_run(ds, scope, limits, Clock::new(limits))
}

fn perfect_run(
    ds: &BinDataset,
    scope: Scope,
    limits: &SearchLimits,
    clock: Clock,
) -> Result<SolveOutcome, OptimizeError> {
    check_limits(limits)?;
    if ds.has_contradictions() {
        return Err(OptimizeError::Contradictions);
    }
    let mut run = Run::new(limits, clock, scope);
    if !has_scope_examples(ds, scope) {
        return Ok(run.finish(SolveStatus::Optimal, Some(DecisionSet::empty(&ds.schema())), Some(0), 0));
    }
    for n in 1..=limits.max_n {
        if clock.expired() {
            return Ok(run.finish(SolveStatus::Timeout, None, None, 0));
        }
        let b = build_perfect(ds, n, scope)?;
        let mut solver = Solver::new();
        solver.add_formula_hard(&b.formula);
        run.stats.solve_calls += 1;
        let r = solver.solve_until(&[], Some(clock.call_deadline()));
        run.stats.conflicts += solver.conflicts();
        match r {
            SolveResult::Sat(a) => {
                run.record(n, RoundStatus::Sat, Some(n as u64));
                let d = verified(decode(&a, &b.varmap, scope, &ds.schema())?, ds, scope)?;
                let size = d.total_size as u64;
                return Ok(run.finish(SolveStatus::Optimal, Some(d), Some(size), 0));
            }
            SolveResult::Unsat(_) => run.record(n, RoundStatus::Unsat, None),
            SolveResult::Unknown => {
                run.record(n, RoundStatus::Unknown, None);
                return Ok(run.finish(SolveStatus::Timeout, None, None, 0));
            }
        }
    }
    Ok(run.finish(SolveStatus::Infeasible, None, None, 0))
}

/// MaxSAT over a bundle with the limits' budgets.
pub fn maxsat_solve(bundle: &CnfBundle, limits: &SearchLimits) -> (MaxSatOutcome, MaxSatStats) {
    let clock = Clock::new(limits);
    maxsat_with_clock(bundle, &clock)
}

fn maxsat_with_clock(bundle: &CnfBundle, clock: &Clock) -> (MaxSatOutcome, MaxSatStats) {
    solve_maxsat(
        &bundle.formula,
        MaxSatBudget {
            deadline: Some(clock.deadline),
            per_call: Some(clock.per_solve),
        },
    )
}

fn check_step(n0: usize, step: usize) -> Result<(), OptimizeError> {
    if n0 == 0 || step == 0 {
        return Err(OptimizeError::Parameter("n0 and step must be at least 1".into()));
    }
    Ok(())
}

/// Maximizes unused nodes under a guessed bound `n0`, growing the bound by
/// `step` while the hard part is unsatisfiable.
pub fn minimize_bounded(
    ds: &BinDataset,
    scope: Scope,
    n0: usize,
    step: usize,
    limits: &SearchLimits,
) -> Result<SolveOutcome, OptimizeError> {
    bounded_run(ds, scope, n0, step, limits, Clock::new(limits))
}

fn bounded_run(
    ds: &BinDataset,
    scope: Scope,
    n0: usize,
    step: usize,
    limits: &SearchLimits,
    clock: Clock,
) -> Result<SolveOutcome, OptimizeError> {
    check_limits(limits)?;
    check_step(n0, step)?;
    if ds.has_contradictions() {
        return Err(OptimizeError::Contradictions);
    }
    let mut run = Run::new(limits, clock, scope);
    if !has_scope_examples(ds, scope) {
        return Ok(run.finish(SolveStatus::Optimal, Some(DecisionSet::empty(&ds.schema())), Some(0), 0));
    }
    let mut n = n0;
    while n <= limits.max_n.max(n0) {
        if clock.expired() {
            return Ok(run.finish(SolveStatus::Timeout, None, None, 0));
        }
        let b = build_bounded(ds, n, scope)?;
        let (out, st) = maxsat_with_clock(&b, &clock);
        run.add_maxsat(&st);
        let status = match &out {
            MaxSatOutcome::Infeasible => {
                run.record(n, RoundStatus::Unsat, None);
                n += step;
                continue;
            }
            MaxSatOutcome::Optimal { .. } => SolveStatus::Optimal,
            MaxSatOutcome::Timeout { best: Some(_) } => SolveStatus::Feasible,
            MaxSatOutcome::Timeout { best: None } => {
                run.record(n, RoundStatus::Unknown, None);
                return Ok(run.finish(SolveStatus::Timeout, None, None, 0));
            }
        };
        let a = out.assignment().expect("has a model");
        let cost = out.cost().expect("has a cost");
        run.record(
            n,
            if status == SolveStatus::Optimal {
                RoundStatus::Optimal
            } else {
                RoundStatus::Feasible
            },
            Some(cost),
        );
        let d = verified(decode(a, &b.varmap, scope, &ds.schema())?, ds, scope)?;
        if d.total_size as u64 != cost {
            return Err(OptimizeError::Internal(format!(
                "bounded cost {cost} differs from decoded size {}",
                d.total_size
            )));
        }
        return Ok(run.finish(status, Some(d), Some(cost), 0));
    }
    Ok(run.finish(SolveStatus::Infeasible, None, None, 0))
}

/// Default first node budget of the sparse search.
pub fn default_sparse_n0(num_features: usize) -> usize {
    (2 * (num_features + 2)).min(32)
}

/// Sparse objective of a decision set: misclassification weight within
/// `scope` plus `node_cost` per node.
pub fn sparse_objective(d: &DecisionSet, ds: &BinDataset, scope: Scope, node_cost: u64) -> u64 {
    let mut errors = 0;
    for (i, e) in ds.examples.iter().enumerate() {
        let positive = target_bit(ds, scope, i);
        let mut reached = false;
        let mut wrong = false;
        for r in d.rules.iter().filter(|r| r.covers(&e.bits)) {
            reached = true;
            let head_positive = match scope {
                Scope::Aggregated => r.head == 1,
                Scope::PerClass(c) => r.head == c,
            };
            wrong |= head_positive != positive;
        }
        let uncovered = needs_coverage(ds, scope, i) && !reached;
        if wrong || uncovered {
            errors += e.weight;
        }
    }
    errors + node_cost * d.total_size as u64
}

/// Minimizes misclassified weight plus `ceil(lambda * M)` per node.
pub fn minimize_sparse(
    ds: &BinDataset,
    scope: Scope,
    lambda: f64,
    n0: Option<usize>,
    step: usize,
    limits: &SearchLimits,
) -> Result<SolveOutcome, OptimizeError> {
    let node_cost = lam_to_cost(lambda, ds.total_weight());
    sparse_run(ds, scope, node_cost, n0, step, limits, Clock::new(limits))
}

/// The round's optimum `cost` within `n` nodes is global once any set with
/// more nodes must cost at least as much.
fn sparse_bound_proves(cost: u64, n: usize, node_cost: u64) -> bool {
    cost <= node_cost.saturating_mul(n as u64 + 1)
}

#[allow(clippy::too_many_arguments)]
fn sparse_run(
    ds: &BinDataset,
    scope: Scope,
    node_cost: u64,
    n0: Option<usize>,
    step: usize,
    limits: &SearchLimits,
    clock: Clock,
) -> Result<SolveOutcome, OptimizeError> {
    check_limits(limits)?;
    let n0 = n0.unwrap_or_else(|| default_sparse_n0(ds.num_features()));
    check_step(n0, step)?;
    if node_cost == 0 {
        return Err(OptimizeError::Parameter("node cost must be positive".into()));
    }
    let mut run = Run::new(limits, clock, scope);
    let mut best: Option<(DecisionSet, u64, u64)> = None;
    let mut n = n0;
    let mut status = SolveStatus::Feasible;
    loop {
        if clock.expired() {
            break;
        }
        let b = build_sparse(ds, n, node_cost, scope)?;
        let (out, st) = maxsat_with_clock(&b, &clock);
        run.add_maxsat(&st);
        let Some(a) = out.assignment() else {
            // The hard part is always satisfiable, so this is a timeout.
            run.record(n, RoundStatus::Unknown, None);
            break;
        };
        let d = decode(a, &b.varmap, scope, &ds.schema())?;
        let cost = sparse_objective(&d, ds, scope, node_cost);
        let proven = matches!(out, MaxSatOutcome::Optimal { .. });
        if proven && Some(cost) != out.cost() {
            return Err(OptimizeError::Internal(format!(
                "sparse optimum {} differs from recomputed cost {cost}",
                out.cost().unwrap()
            )));
        }
        run.record(
            n,
            if proven {
                RoundStatus::Optimal
            } else {
                RoundStatus::Feasible
            },
            Some(cost),
        );
        if best.as_ref().is_none_or(|(_, c, _)| cost < *c) {
            best = Some((d, cost, b.objective_offset));
        }
        if !proven {
            break;
        }
        let best_cost = best.as_ref().unwrap().1;
        if sparse_bound_proves(best_cost, n, node_cost) {
            status = SolveStatus::Optimal;
            break;
        }
        if n >= limits.max_n {
            break;
        }
        n = (n + step).min(limits.max_n);
    }
    Ok(match best {
        Some((d, cost, offset)) => run.finish(status, Some(d), Some(cost), offset),
        None => run.finish(SolveStatus::Timeout, None, None, 0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Iterative SAT search for the smallest perfect set.
    Perfect,
    /// MaxSAT over a node budget for the smallest perfect set.
    Bounded { n0: usize, step: usize },
    /// MaxSAT trading errors against size.
    Sparse {
        lambda: f64,
        n0: Option<usize>,
        step: usize,
    },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Perfect => "opt",
            Mode::Bounded { .. } => "mopt",
            Mode::Sparse { .. } => "sparse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeChoice {
    Aggregated,
    /// One run per class; the result is the union.
    PerClass,
}

fn run_one(
    ds: &BinDataset,
    mode: Mode,
    scope: Scope,
    node_cost: u64,
    limits: &SearchLimits,
    clock: Clock,
) -> Result<SolveOutcome, OptimizeError> {
    match mode {
        Mode::Perfect => perfect_run(ds, scope, limits, clock),
        Mode::Bounded { n0, step } => bounded_run(ds, scope, n0, step, limits, clock),
        Mode::Sparse { n0, step, .. } => sparse_run(ds, scope, node_cost, n0, step, limits, clock),
    }
}

/// Learns a decision set. Per-class runs execute in parallel and their
/// results are joined; the combined status is the weakest of the parts.
pub fn learn(
    ds: &BinDataset,
    mode: Mode,
    scope: ScopeChoice,
    limits: &SearchLimits,
) -> Result<SolveOutcome, OptimizeError> {
    let clock = Clock::new(limits);
    let node_cost = match mode {
        Mode::Sparse { lambda, .. } => lam_to_cost(lambda, ds.total_weight()),
        _ => 0,
    };
    let mut out = match scope {
        ScopeChoice::Aggregated => run_one(ds, mode, Scope::Aggregated, node_cost, limits, clock)?,
        ScopeChoice::PerClass => {
            let parts: Vec<SolveOutcome> = (0..ds.classes.len())
                .into_par_iter()
                .map(|c| run_one(ds, mode, Scope::PerClass(c), node_cost, limits, clock))
                .collect::<Result<_, _>>()?;
            combine(ds, parts)
        }
    };
    if let Some(d) = out.decision_set.as_mut() {
        let md = &mut d.metadata;
        md.mode = Some(mode.name().to_string());
        md.scope = Some(
            match scope {
                ScopeChoice::Aggregated => "aggregated",
                ScopeChoice::PerClass => "per-class",
            }
            .to_string(),
        );
        if let Mode::Sparse { lambda, .. } = mode {
            md.lambda = Some(lambda);
            md.node_cost = Some(node_cost);
            md.objective_offset = Some(out.objective_offset);
        }
        md.objective = out.objective;
        md.status = Some(out.status.to_string());
        md.solver_stats = Some(out.stats.summary());
    }
    Ok(out)
}

fn combine(ds: &BinDataset, parts: Vec<SolveOutcome>) -> SolveOutcome {
    let status = parts
        .iter()
        .map(|p| p.status)
        .max()
        .unwrap_or(SolveStatus::Optimal);
    let mut stats = SearchStats::default();
    let mut objective = Some(0u64);
    let mut offset = 0;
    let mut set = Some(DecisionSet::empty(&ds.schema()));
    for p in parts {
        stats.absorb(p.stats);
        objective = objective.zip(p.objective).map(|(a, b)| a + b);
        offset += p.objective_offset;
        set = set.zip(p.decision_set).map(|(a, b)| a.union(b));
    }
    if matches!(status, SolveStatus::Infeasible | SolveStatus::Timeout) {
        set = None;
        objective = None;
    }
    SolveOutcome {
        status,
        decision_set: set,
        objective,
        objective_offset: offset,
        stats,
    }
}

/// Minimal size of a perfect decision set by exhaustive search over node
/// sequences, simulating validity directly (no CNF). `None` when no set of
/// at most `cap` nodes exists.
pub fn oracle_min_size(
    ds: &BinDataset,
    scope: Scope,
    cap: usize,
) -> Result<Option<usize>, OptimizeError> {
    let (m, k) = (ds.len(), ds.num_features());
    if m > 8 || k > 4 {
        return Err(OptimizeError::OracleTooLarge { m, k });
    }
    let all: u32 = (1u32 << m) - 1;
    let relevant: u32 = (0..m)
        .filter(|&i| needs_coverage(ds, scope, i))
        .fold(0, |acc, i| acc | 1 << i);
    if relevant == 0 {
        return Ok(Some(0));
    }
    let positive: u32 = (0..m)
        .filter(|&i| target_bit(ds, scope, i))
        .fold(0, |acc, i| acc | 1 << i);
    let with_bit: Vec<u32> = (0..k)
        .map(|r| {
            (0..m)
                .filter(|&i| ds.examples[i].bits[r])
                .fold(0, |acc, i| acc | 1 << i)
        })
        .collect();
    let leaf_values: &[bool] = match scope {
        Scope::Aggregated => &[false, true],
        Scope::PerClass(_) => &[true],
    };
    // State: (examples valid at the next node, examples covered so far).
    // Breadth-first order yields the shortest sequence.
    let start = (all, 0u32);
    let mut seen: HashSet<(u32, u32)> = HashSet::from([start]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some(((valid, covered), len)) = queue.pop_front() {
        if len == cap {
            continue;
        }
        let mut next = Vec::with_capacity(2 * k + 2);
        for &t in leaf_values {
            let agrees = if t { positive } else { all & !positive };
            if valid & !agrees != 0 {
                continue;
            }
            let cov = covered | valid;
            if cov & relevant == relevant {
                return Ok(Some(len + 1));
            }
            next.push((all, cov));
        }
        for bits in &with_bit {
            for mask in [*bits, all & !bits] {
                next.push((valid & mask, covered));
            }
        }
        for s in next {
            if seen.insert(s) {
                queue.push_back((s, len + 1));
            }
        }
    }
    Ok(None)
}
