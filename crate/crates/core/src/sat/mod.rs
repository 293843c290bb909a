//! Propositional core: literals, formulas, a CDCL solver, cardinality
//! encodings, DIMACS I/O and a model-improving MaxSAT driver.

pub mod card;
pub mod dimacs;
pub mod maxsat;
pub mod solver;

use std::fmt;
use std::ops::{Deref, Not};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use card::{exactly_one, exactly_one_with, AmoEncoding, Totalizer, WeightedSum};
pub use maxsat::{MaxSatOutcome, MaxSatStats};
pub use solver::{Solver, SolverConfig, SolverStats};

/// A propositional variable, 0-based internally. DIMACS id is `index + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    #[inline]
    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }

    /// Literal of this variable with the given truth value.
    #[inline]
    pub fn lit(self, value: bool) -> Lit {
        Lit::new(self, value)
    }

    pub fn dimacs(self) -> i64 {
        self.0 as i64 + 1
    }
}

/// A literal packed as `2 * var + negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | (!positive) as u32)
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_pos(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    /// Parses a non-zero signed DIMACS literal.
    pub fn from_dimacs(lit: i64) -> Option<Lit> {
        if lit == 0 || lit.unsigned_abs() > u32::MAX as u64 / 2 {
            return None;
        }
        Some(Lit::new(Var((lit.unsigned_abs() - 1) as u32), lit > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var().dimacs();
        if self.is_pos() {
            v
        } else {
            -v
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals with no repeated literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Normalizes `lits`: drops repeated literals (keeping first-occurrence
    /// order). Returns `None` for a tautology.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Clause> {
        let mut out: Vec<Lit> = Vec::new();
        for l in lits {
            if out.contains(&!l) {
                return None;
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Some(Clause { lits: out })
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn max_var(&self) -> Option<Var> {
        self.lits.iter().map(|l| l.var()).max()
    }

    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.lits.iter().any(|&l| a.lit_value(l))
    }
}

impl Deref for Clause {
    type Target = [Lit];
    fn deref(&self) -> &[Lit] {
        &self.lits
    }
}

/// Hard clauses plus weighted soft clauses over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Formula {
    pub num_vars: usize,
    pub hard: Vec<Clause>,
    pub soft: Vec<(Clause, u64)>,
}

impl Formula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_var(&mut self) -> Var {
        let v = Var(self.num_vars as u32);
        self.num_vars += 1;
        v
    }

    fn bump_vars(&mut self, c: &Clause) {
        if let Some(v) = c.max_var() {
            self.num_vars = self.num_vars.max(v.index() + 1);
        }
    }

    /// Adds a hard clause; tautologies are dropped.
    pub fn add_hard(&mut self, lits: impl IntoIterator<Item = Lit>) {
        if let Some(c) = Clause::new(lits) {
            self.bump_vars(&c);
            self.hard.push(c);
        }
    }

    /// Adds a soft clause. Panics on a zero weight.
    pub fn add_soft(&mut self, lits: impl IntoIterator<Item = Lit>, weight: u64) {
        assert!(weight >= 1, "soft clause weight must be positive");
        if let Some(c) = Clause::new(lits) {
            self.bump_vars(&c);
            self.soft.push((c, weight));
        }
    }

    pub fn total_soft_weight(&self) -> u64 {
        self.soft.iter().map(|(_, w)| w).sum()
    }

    /// Total number of literal occurrences over hard and soft clauses.
    pub fn literal_count(&self) -> usize {
        self.hard.iter().map(|c| c.len()).sum::<usize>()
            + self.soft.iter().map(|(c, _)| c.len()).sum::<usize>()
    }

    /// Weight of soft clauses falsified by `a`.
    pub fn cost(&self, a: &Assignment) -> u64 {
        self.soft
            .iter()
            .filter(|(c, _)| !c.is_satisfied(a))
            .map(|(_, w)| w)
            .sum()
    }
}

/// A total truth assignment, indexed by variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Panics if `v` is outside the assignment.
    pub fn value(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn lit_value(&self, l: Lit) -> bool {
        self.value(l.var()) == l.is_pos()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelCheck {
    pub satisfied: bool,
    /// Index into `Formula::hard` of the first falsified clause.
    pub first_falsified: Option<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("assignment covers {got} variables but formula declares {expected}")]
    Partial { expected: usize, got: usize },
}

/// Checks the hard clauses of `f` under `a`.
pub fn check_model(f: &Formula, a: &Assignment) -> Result<ModelCheck, CheckError> {
    if a.len() < f.num_vars {
        return Err(CheckError::Partial {
            expected: f.num_vars,
            got: a.len(),
        });
    }
    let first_falsified = f.hard.iter().position(|c| !c.is_satisfied(a));
    Ok(ModelCheck {
        satisfied: first_falsified.is_none(),
        first_falsified,
    })
}

/// Something clauses can be emitted into: a formula under construction or a
/// live solver.
pub trait ClauseSink {
    fn new_var(&mut self) -> Var;
    fn add_clause(&mut self, lits: &[Lit]);
}

impl ClauseSink for Formula {
    fn new_var(&mut self) -> Var {
        self.fresh_var()
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        self.add_hard(lits.iter().copied());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    /// Subset of the assumptions that is jointly unsatisfiable with the
    /// clauses. Empty when the clauses alone are unsatisfiable.
    Unsat(Vec<Lit>),
    /// Budget exhausted.
    Unknown,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat(_))
    }
}

/// Incremental SAT backend. [`Solver`] is the built-in implementation; an
/// external solver can be plugged in behind the same surface.
pub trait SatBackend: ClauseSink {
    fn num_vars(&self) -> usize;

    fn solve_until(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> SolveResult;

    fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        self.solve_until(assumptions, None)
    }

    /// Conflicts encountered so far, if the backend counts them.
    fn conflicts(&self) -> u64 {
        0
    }

    fn add_formula_hard(&mut self, f: &Formula) {
        while self.num_vars() < f.num_vars {
            self.new_var();
        }
        for c in &f.hard {
            self.add_clause(c);
        }
    }
}
