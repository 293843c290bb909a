//! Decision sets as node sequences, encoded to CNF/WCNF.
//!
//! A decision set of size N is laid out as N nodes. Each node selects one
//! feature (a body literal whose sign is the node's truth value) or the class
//! feature (a leaf closing the current rule). An example is valid at a node
//! while it agrees with every body literal seen since the last leaf.
//!
//! Three models share that layout:
//!
//! * perfect: exactly N nodes, every example covered by a leaf of its own
//!   class and by no leaf of another class;
//! * bounded: up to N nodes with "unused" flags; MaxSAT maximizes unused
//!   nodes;
//! * sparse: bounded plus a misclassification flag per example, trading
//!   errors against node cost.
//!
//! Per-class scope learns the rules of a single target class: leaves are
//! forced positive and only target examples need coverage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{BinDataset, Schema};
use crate::sat::{exactly_one, Formula, Lit, Var};

pub use crate::sat::card::{exactly_one_with, AmoEncoding, PAIRWISE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "target")]
pub enum Scope {
    /// One model for both classes; leaf polarity selects class 1 or 0.
    Aggregated,
    /// Rules for the given class index only.
    PerClass(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodeMode {
    Perfect,
    Bounded,
    Sparse,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("node budget must be at least 1")]
    NoNodes,
    #[error("aggregated scope needs at most two classes, dataset has {0}")]
    TooManyClasses(usize),
    #[error("target class {target} out of range ({classes} classes)")]
    InvalidTarget { target: usize, classes: usize },
    #[error("node cost must be at least 1")]
    ZeroNodeCost,
}

/// Solver variables of one encoding. Indices are 0-based: node `j` in
/// `0..nodes`, feature `r` in `0..=features` with `features` denoting the
/// class feature, example `i` in `0..examples`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    pub nodes: usize,
    pub features: usize,
    pub examples: usize,
    /// `s[j][r]`: node `j` selects feature `r`.
    pub s: Vec<Vec<Var>>,
    /// `t[j]`: truth value of node `j`'s literal.
    pub t: Vec<Var>,
    /// `v[i][j]`: example `i` is valid at node `j`.
    pub v: Vec<Vec<Var>>,
    /// `u[j]`: node `j` is unused (bounded and sparse models).
    pub u: Option<Vec<Var>>,
    /// `m[i]`: example `i` is misclassified (sparse model).
    pub m: Option<Vec<Var>>,
    /// Number of structural variables; auxiliaries follow.
    pub core_vars: usize,
}

impl VarMap {
    pub fn class_feature(&self) -> usize {
        self.features
    }

    pub fn leaf(&self, j: usize) -> Var {
        self.s[j][self.features]
    }
}

/// An encoded instance plus what is needed to decode its models.
#[derive(Debug, Clone)]
pub struct CnfBundle {
    pub formula: Formula,
    pub varmap: VarMap,
    pub scope: Scope,
    pub mode: EncodeMode,
    /// Cost of one used node in the sparse model, 0 otherwise.
    pub node_cost: u64,
    /// Constant `N * node_cost` left out of the sparse objective.
    pub objective_offset: u64,
}

/// Node cost from a regularization rate: `ceil(lambda * m_effective)`,
/// clamped to at least 1. Products within 1e-9 (relative) of an integer are
/// treated as that integer so decimal rates like 0.1 behave exactly.
pub fn lam_to_cost(lambda: f64, m_effective: u64) -> u64 {
    let x = lambda.max(0.0) * m_effective as f64;
    let r = x.round();
    let c = if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    };
    (c as u64).max(1)
}

fn check_scope(ds: &BinDataset, scope: Scope) -> Result<(), EncodeError> {
    match scope {
        Scope::Aggregated if ds.classes.len() > 2 => {
            Err(EncodeError::TooManyClasses(ds.classes.len()))
        }
        Scope::PerClass(c) if c >= ds.classes.len() => Err(EncodeError::InvalidTarget {
            target: c,
            classes: ds.classes.len(),
        }),
        _ => Ok(()),
    }
}

/// Whether example `i` is a positive example for the leaf literal: class 1
/// when aggregated, the target class when per-class.
pub fn target_bit(ds: &BinDataset, scope: Scope, i: usize) -> bool {
    let c = ds.examples[i].class;
    match scope {
        Scope::Aggregated => c == 1,
        Scope::PerClass(target) => c == target,
    }
}

/// Whether example `i` must be covered by some leaf.
pub fn needs_coverage(ds: &BinDataset, scope: Scope, i: usize) -> bool {
    match scope {
        Scope::Aggregated => true,
        Scope::PerClass(target) => ds.examples[i].class == target,
    }
}

struct Encoder<'a> {
    ds: &'a BinDataset,
    scope: Scope,
    f: Formula,
    vm: VarMap,
}

impl<'a> Encoder<'a> {
    fn new(ds: &'a BinDataset, n: usize, scope: Scope, unused: bool, miscl: bool) -> Self {
        let k = ds.num_features();
        let m = ds.len();
        let mut f = Formula::new();
        let s = (0..n)
            .map(|_| (0..=k).map(|_| f.fresh_var()).collect())
            .collect();
        let t = (0..n).map(|_| f.fresh_var()).collect();
        let v = (0..m)
            .map(|_| (0..n).map(|_| f.fresh_var()).collect())
            .collect();
        let u = unused.then(|| (0..n).map(|_| f.fresh_var()).collect());
        let mv = miscl.then(|| (0..m).map(|_| f.fresh_var()).collect());
        let core_vars = f.num_vars;
        Encoder {
            ds,
            scope,
            f,
            vm: VarMap {
                nodes: n,
                features: k,
                examples: m,
                s,
                t,
                v,
                u,
                m: mv,
                core_vars,
            },
        }
    }

    fn leaf(&self, j: usize) -> Lit {
        self.vm.leaf(j).pos()
    }

    /// Each node selects exactly one feature, or is unused when `u` exists.
    fn one_choice_per_node(&mut self) {
        for j in 0..self.vm.nodes {
            let mut lits: Vec<Lit> = Vec::with_capacity(self.vm.features + 2);
            if let Some(u) = &self.vm.u {
                lits.push(u[j].pos());
            }
            lits.extend(self.vm.s[j].iter().map(|v| v.pos()));
            exactly_one(&mut self.f, &lits);
        }
    }

    /// Unused nodes form a suffix and the last used node is a leaf.
    fn unused_suffix(&mut self) {
        let n = self.vm.nodes;
        let u = self.vm.u.clone().expect("bounded layout");
        for j in 0..n - 1 {
            self.f.add_hard([u[j].neg(), u[j + 1].pos()]);
            self.f.add_hard([u[j + 1].neg(), u[j].pos(), self.leaf(j)]);
        }
        self.f.add_hard([u[n - 1].pos(), self.leaf(n - 1)]);
    }

    /// Validity at the first node and its propagation along the sequence.
    fn validity(&mut self) {
        let (n, k) = (self.vm.nodes, self.vm.features);
        for i in 0..self.ds.len() {
            self.f.add_hard([self.vm.v[i][0].pos()]);
            let bits = &self.ds.examples[i].bits;
            for j in 0..n.saturating_sub(1) {
                let t = self.vm.t[j].pos();
                let leaf = self.leaf(j);
                let cur = self.vm.v[i][j].pos();
                let next = self.vm.v[i][j + 1].pos();
                // agree <-> OR_r s[j][r] & (t == bits[r])
                let agree = self.f.fresh_var().pos();
                let mut when_true = vec![!agree, !t];
                let mut when_false = vec![!agree, t];
                for r in 0..k {
                    let sel = self.vm.s[j][r].pos();
                    if bits[r] {
                        self.f.add_hard([!sel, !t, agree]);
                        when_true.push(sel);
                    } else {
                        self.f.add_hard([!sel, t, agree]);
                        when_false.push(sel);
                    }
                }
                self.f.add_hard(when_true);
                self.f.add_hard(when_false);
                // next <-> leaf | (cur & agree)
                self.f.add_hard([!leaf, next]);
                self.f.add_hard([!cur, !agree, next]);
                self.f.add_hard([!next, leaf, cur]);
                self.f.add_hard([!next, leaf, agree]);
            }
        }
    }

    /// A leaf reached by example `i` agrees with its class, unless `i` is
    /// flagged misclassified.
    fn leaf_agreement(&mut self) {
        for i in 0..self.ds.len() {
            let positive = target_bit(self.ds, self.scope, i);
            for j in 0..self.vm.nodes {
                let mut c = vec![!self.leaf(j), self.vm.v[i][j].neg(), self.vm.t[j].lit(positive)];
                if let Some(m) = &self.vm.m {
                    c.push(m[i].pos());
                }
                self.f.add_hard(c);
            }
        }
    }

    /// Every example needing coverage reaches some leaf (or is flagged).
    fn coverage(&mut self) {
        for i in 0..self.ds.len() {
            if !needs_coverage(self.ds, self.scope, i) {
                continue;
            }
            let mut clause: Vec<Lit> = Vec::with_capacity(self.vm.nodes + 1);
            if let Some(m) = &self.vm.m {
                clause.push(m[i].pos());
            }
            for j in 0..self.vm.nodes {
                // reached <-> leaf & valid
                let reached = self.f.fresh_var().pos();
                let leaf = self.leaf(j);
                let valid = self.vm.v[i][j].pos();
                self.f.add_hard([!reached, leaf]);
                self.f.add_hard([!reached, valid]);
                self.f.add_hard([!leaf, !valid, reached]);
                clause.push(reached);
            }
            self.f.add_hard(clause);
        }
    }

    /// Leaves carry the positive literal per class; with a single class in
    /// aggregated scope they carry the negative one.
    fn leaf_polarity(&mut self) {
        let forced = match self.scope {
            Scope::PerClass(_) => Some(true),
            Scope::Aggregated if self.ds.classes.len() < 2 => Some(false),
            Scope::Aggregated => None,
        };
        if let Some(pol) = forced {
            for j in 0..self.vm.nodes {
                self.f.add_hard([!self.leaf(j), self.vm.t[j].lit(pol)]);
            }
        }
    }

    fn finish(self, mode: EncodeMode, node_cost: u64) -> CnfBundle {
        CnfBundle {
            objective_offset: node_cost * self.vm.nodes as u64,
            formula: self.f,
            varmap: self.vm,
            scope: self.scope,
            mode,
            node_cost,
        }
    }
}

/// Exactly `n` nodes forming a perfect decision set.
pub fn build_perfect(ds: &BinDataset, n: usize, scope: Scope) -> Result<CnfBundle, EncodeError> {
    if n == 0 {
        return Err(EncodeError::NoNodes);
    }
    check_scope(ds, scope)?;
    let mut e = Encoder::new(ds, n, scope, false, false);
    e.one_choice_per_node();
    let last = e.leaf(n - 1);
    e.f.add_hard([last]);
    e.validity();
    e.leaf_agreement();
    e.coverage();
    e.leaf_polarity();
    Ok(e.finish(EncodeMode::Perfect, 0))
}

/// At most `n` nodes; soft units `(u_j, 1)` reward unused nodes.
pub fn build_bounded(ds: &BinDataset, n: usize, scope: Scope) -> Result<CnfBundle, EncodeError> {
    if n == 0 {
        return Err(EncodeError::NoNodes);
    }
    check_scope(ds, scope)?;
    let mut e = Encoder::new(ds, n, scope, true, false);
    e.one_choice_per_node();
    e.unused_suffix();
    e.validity();
    e.leaf_agreement();
    e.coverage();
    e.leaf_polarity();
    let u = e.vm.u.clone().unwrap();
    for uj in u {
        e.f.add_soft([uj.pos()], 1);
    }
    Ok(e.finish(EncodeMode::Bounded, 0))
}

/// At most `n` nodes trading misclassified weight against `node_cost` per
/// used node. Soft clauses: `(!m_i, weight_i)` and `(u_j, node_cost)`.
pub fn build_sparse(
    ds: &BinDataset,
    n: usize,
    node_cost: u64,
    scope: Scope,
) -> Result<CnfBundle, EncodeError> {
    if n == 0 {
        return Err(EncodeError::NoNodes);
    }
    if node_cost == 0 {
        return Err(EncodeError::ZeroNodeCost);
    }
    check_scope(ds, scope)?;
    let mut e = Encoder::new(ds, n, scope, true, true);
    e.one_choice_per_node();
    e.unused_suffix();
    e.validity();
    e.leaf_agreement();
    e.coverage();
    e.leaf_polarity();
    let m = e.vm.m.clone().unwrap();
    for (i, mi) in m.iter().enumerate() {
        e.f.add_soft([mi.neg()], ds.examples[i].weight);
    }
    let u = e.vm.u.clone().unwrap();
    for uj in u {
        e.f.add_soft([uj.pos()], node_cost);
    }
    Ok(e.finish(EncodeMode::Sparse, node_cost))
}

pub fn build(
    ds: &BinDataset,
    mode: EncodeMode,
    n: usize,
    node_cost: u64,
    scope: Scope,
) -> Result<CnfBundle, EncodeError> {
    match mode {
        EncodeMode::Perfect => build_perfect(ds, n, scope),
        EncodeMode::Bounded => build_bounded(ds, n, scope),
        EncodeMode::Sparse => build_sparse(ds, n, node_cost, scope),
    }
}

/// Variable map with 1-based DIMACS ids, written next to an exported
/// formula so models from an external solver can be decoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarMapSidecar {
    pub mode: EncodeMode,
    pub scope: Scope,
    pub nodes: usize,
    pub features: usize,
    pub examples: usize,
    pub num_vars: usize,
    pub node_cost: u64,
    pub objective_offset: u64,
    pub schema: Schema,
    pub s: Vec<Vec<i64>>,
    pub t: Vec<i64>,
    pub v: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<i64>>,
}

fn ids(vars: &[Var]) -> Vec<i64> {
    vars.iter().map(|v| v.dimacs()).collect()
}

fn vars(ids: &[i64]) -> Vec<Var> {
    ids.iter().map(|&d| Var((d - 1) as u32)).collect()
}

impl CnfBundle {
    pub fn sidecar(&self, schema: Schema) -> VarMapSidecar {
        let vm = &self.varmap;
        VarMapSidecar {
            mode: self.mode,
            scope: self.scope,
            nodes: vm.nodes,
            features: vm.features,
            examples: vm.examples,
            num_vars: self.formula.num_vars,
            node_cost: self.node_cost,
            objective_offset: self.objective_offset,
            schema,
            s: vm.s.iter().map(|row| ids(row)).collect(),
            t: ids(&vm.t),
            v: vm.v.iter().map(|row| ids(row)).collect(),
            u: vm.u.as_deref().map(ids),
            m: vm.m.as_deref().map(ids),
        }
    }
}

impl VarMapSidecar {
    pub fn varmap(&self) -> VarMap {
        VarMap {
            nodes: self.nodes,
            features: self.features,
            examples: self.examples,
            s: self.s.iter().map(|row| vars(row)).collect(),
            t: vars(&self.t),
            v: self.v.iter().map(|row| vars(row)).collect(),
            u: self.u.as_deref().map(vars),
            m: self.m.as_deref().map(vars),
            core_vars: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::sat::{check_model, SatBackend, SolveResult, Solver};

    fn solve(b: &CnfBundle) -> SolveResult {
        let mut s = Solver::new();
        s.add_formula_hard(&b.formula);
        s.solve(&[])
    }

    #[test]
    fn core_variable_layout() {
        let b = build_perfect(&example1(), 7, Scope::Aggregated).unwrap();
        assert_eq!(b.varmap.core_vars, 35 + 7 + 56);
        assert!(b.formula.num_vars >= 98);
        assert!(b.formula.soft.is_empty());
    }

    #[test]
    fn example_sizes_sat_and_unsat() {
        let ds = example1();
        for n in 1..=6 {
            let b = build_perfect(&ds, n, Scope::Aggregated).unwrap();
            assert!(solve(&b).is_unsat(), "size {n} should be UNSAT");
        }
        let b = build_perfect(&ds, 7, Scope::Aggregated).unwrap();
        match solve(&b) {
            SolveResult::Sat(a) => assert!(check_model(&b.formula, &a).unwrap().satisfied),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn per_class_sizes() {
        let ds = example1();
        for n in 1..=2 {
            assert!(solve(&build_perfect(&ds, n, Scope::PerClass(1)).unwrap()).is_unsat());
        }
        assert!(solve(&build_perfect(&ds, 3, Scope::PerClass(1)).unwrap()).is_sat());
        for n in 1..=3 {
            assert!(solve(&build_perfect(&ds, n, Scope::PerClass(0)).unwrap()).is_unsat());
        }
        assert!(solve(&build_perfect(&ds, 4, Scope::PerClass(0)).unwrap()).is_sat());
    }

    #[test]
    fn soft_clause_shapes() {
        let ds = example1();
        let b = build_bounded(&ds, 9, Scope::Aggregated).unwrap();
        let u = b.varmap.u.as_ref().unwrap();
        let softs: Vec<(Vec<Lit>, u64)> = b
            .formula
            .soft
            .iter()
            .map(|(c, w)| (c.lits().to_vec(), *w))
            .collect();
        let expect: Vec<(Vec<Lit>, u64)> = u.iter().map(|v| (vec![v.pos()], 1)).collect();
        assert_eq!(softs, expect);

        let b = build_sparse(&ds, 9, 4, Scope::Aggregated).unwrap();
        let m = b.varmap.m.as_ref().unwrap();
        let u = b.varmap.u.as_ref().unwrap();
        let mut expect: Vec<(Vec<Lit>, u64)> = m.iter().map(|v| (vec![v.neg()], 1)).collect();
        expect.extend(u.iter().map(|v| (vec![v.pos()], 4)));
        let softs: Vec<(Vec<Lit>, u64)> = b
            .formula
            .soft
            .iter()
            .map(|(c, w)| (c.lits().to_vec(), *w))
            .collect();
        assert_eq!(softs, expect);
        assert_eq!(b.formula.total_soft_weight() + 1, 1 + 8 + 9 * 4);
        assert_eq!(b.objective_offset, 36);
    }

    #[test]
    fn sparse_is_always_feasible() {
        let ds = example1();
        let b = build_sparse(&ds, 1, 100, Scope::Aggregated).unwrap();
        assert!(solve(&b).is_sat());
    }

    #[test]
    fn scope_and_argument_errors() {
        let mut ds = example1();
        assert_eq!(
            build_perfect(&ds, 0, Scope::Aggregated).unwrap_err(),
            EncodeError::NoNodes
        );
        assert_eq!(
            build_sparse(&ds, 3, 0, Scope::Aggregated).unwrap_err(),
            EncodeError::ZeroNodeCost
        );
        assert!(matches!(
            build_perfect(&ds, 3, Scope::PerClass(2)),
            Err(EncodeError::InvalidTarget { .. })
        ));
        ds.classes.push("2".into());
        assert_eq!(
            build_perfect(&ds, 3, Scope::Aggregated).unwrap_err(),
            EncodeError::TooManyClasses(3)
        );
    }

    #[test]
    fn lambda_to_node_cost() {
        assert_eq!(lam_to_cost(0.5, 8), 4);
        assert_eq!(lam_to_cost(0.005, 8), 1);
        assert_eq!(lam_to_cost(0.05, 355), 18);
        assert_eq!(lam_to_cost(0.1, 30), 3);
        assert_eq!(lam_to_cost(0.0, 30), 1);
    }

    #[test]
    fn sidecar_round_trip() {
        let ds = example1();
        let b = build_sparse(&ds, 3, 2, Scope::PerClass(1)).unwrap();
        let side = b.sidecar(ds.schema());
        assert_eq!(side.s[0][0], 1);
        let json = serde_json::to_string(&side).unwrap();
        let back: VarMapSidecar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, side);
        let vm = back.varmap();
        assert_eq!(vm.s, b.varmap.s);
        assert_eq!(vm.v, b.varmap.v);
        assert_eq!(vm.m, b.varmap.m);
    }
}
