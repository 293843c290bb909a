//! Model-improving (SAT-UNSAT) linear search for weighted partial MaxSAT.
//!
//! Every soft clause gets a relaxation literal: the negated literal for unit
//! softs, a fresh variable appended to the clause otherwise. After the first
//! model, a [`WeightedSum`] over the relaxation literals (one totalizer per
//! weight class) is built with the first cost as cap, and each later call
//! assumes "cost <= best - 1" until the solver answers UNSAT.

use std::time::{Duration, Instant};

use super::card::WeightedSum;
use super::{Assignment, Formula, Lit, SatBackend, SolveResult, Solver};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaxSatOutcome {
    Optimal { assignment: Assignment, cost: u64 },
    /// The hard clauses are unsatisfiable.
    Infeasible,
    /// A budget ran out; carries the best model found, if any.
    Timeout { best: Option<(Assignment, u64)> },
}

impl MaxSatOutcome {
    pub fn cost(&self) -> Option<u64> {
        match self {
            MaxSatOutcome::Optimal { cost, .. } => Some(*cost),
            MaxSatOutcome::Timeout { best } => best.as_ref().map(|(_, c)| *c),
            MaxSatOutcome::Infeasible => None,
        }
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            MaxSatOutcome::Optimal { assignment, .. } => Some(assignment),
            MaxSatOutcome::Timeout { best } => best.as_ref().map(|(a, _)| a),
            MaxSatOutcome::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MaxSatStats {
    pub solve_calls: u64,
    pub conflicts: u64,
    /// Cost of every model found, in order.
    pub costs: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MaxSatBudget {
    pub deadline: Option<Instant>,
    pub per_call: Option<Duration>,
}

impl MaxSatBudget {
    fn call_deadline(&self) -> Option<Instant> {
        let per = self.per_call.map(|d| Instant::now() + d);
        match (self.deadline, per) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

pub fn solve_maxsat(f: &Formula, budget: MaxSatBudget) -> (MaxSatOutcome, MaxSatStats) {
    solve_maxsat_with(Solver::new(), f, budget)
}

pub fn solve_maxsat_with<B: SatBackend>(
    mut backend: B,
    f: &Formula,
    budget: MaxSatBudget,
) -> (MaxSatOutcome, MaxSatStats) {
    let mut stats = MaxSatStats::default();
    backend.add_formula_hard(f);
    let mut relax: Vec<(Lit, u64)> = Vec::with_capacity(f.soft.len());
    for (c, w) in &f.soft {
        match c.lits() {
            [] => {}
            [l] => relax.push((!*l, *w)),
            lits => {
                let r = backend.new_var().pos();
                let mut ext = lits.to_vec();
                ext.push(r);
                backend.add_clause(&ext);
                relax.push((r, *w));
            }
        }
    }

    let call = |backend: &mut B, assumptions: &[Lit], stats: &mut MaxSatStats| {
        stats.solve_calls += 1;
        let r = backend.solve_until(assumptions, budget.call_deadline());
        stats.conflicts = backend.conflicts();
        r
    };

    let mut best = match call(&mut backend, &[], &mut stats) {
        SolveResult::Unsat(_) => return (MaxSatOutcome::Infeasible, stats),
        SolveResult::Unknown => return (MaxSatOutcome::Timeout { best: None }, stats),
        SolveResult::Sat(a) => {
            let cost = f.cost(&a);
            stats.costs.push(cost);
            (a, cost)
        }
    };
    // Clauses that are empty contribute a fixed cost no model can avoid.
    let floor: u64 = f
        .soft
        .iter()
        .filter(|(c, _)| c.is_empty())
        .map(|(_, w)| w)
        .sum();
    if best.1 == floor {
        return (
            MaxSatOutcome::Optimal {
                assignment: best.0,
                cost: best.1,
            },
            stats,
        );
    }

    let sum = WeightedSum::build(&mut backend, &relax, best.1 - floor - 1);
    loop {
        let target = best.1 - floor - 1;
        let assumptions: Vec<Lit> = sum.at_most(target).into_iter().collect();
        match call(&mut backend, &assumptions, &mut stats) {
            SolveResult::Sat(a) => {
                let cost = f.cost(&a);
                debug_assert!(cost < best.1, "model-improving search must improve");
                stats.costs.push(cost);
                best = (a, cost);
                if cost == floor {
                    break;
                }
            }
            SolveResult::Unsat(_) => break,
            SolveResult::Unknown => {
                return (MaxSatOutcome::Timeout { best: Some(best) }, stats);
            }
        }
    }
    (
        MaxSatOutcome::Optimal {
            assignment: best.0,
            cost: best.1,
        },
        stats,
    )
}
