//! Decision sets: decoding from solver models, verification, evaluation and
//! JSON persistence.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{BinDataset, Binarizer, Schema};
use crate::encoder::{Scope, VarMap};
use crate::sat::Assignment;

/// A body literal: feature `feature` is required true (`neg == false`) or
/// false (`neg == true`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub feature: usize,
    pub neg: bool,
}

impl Literal {
    pub fn holds(&self, bits: &[bool]) -> bool {
        bits[self.feature] != self.neg
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    /// Normalized body: distinct literals in node order.
    pub body: Vec<Literal>,
    /// Class index predicted by the rule.
    pub head: usize,
    /// Nodes the rule occupied in the encoding (body nodes plus the leaf).
    pub nodes: usize,
}

impl Rule {
    pub fn new(body: Vec<Literal>, head: usize) -> Rule {
        let nodes = body.len() + 1;
        let mut r = Rule { body, head, nodes };
        r.normalize();
        r
    }

    fn normalize(&mut self) {
        let mut seen = BTreeSet::new();
        self.body.retain(|l| seen.insert(*l));
    }

    pub fn covers(&self, bits: &[bool]) -> bool {
        self.body.iter().all(|l| l.holds(bits))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverSummary {
    pub solve_calls: u64,
    pub conflicts: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_cost: Option<u64>,
    /// Constant left out of the reported sparse objective.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_offset: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_stats: Option<SolverSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionSet {
    pub classes: Vec<String>,
    #[serde(default)]
    pub class_name: String,
    pub features: Vec<String>,
    pub rules: Vec<Rule>,
    pub total_size: usize,
    #[serde(default)]
    pub metadata: Metadata,
    /// Column encodings of the training data, so raw tables can be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<Binarizer>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("node {node} is used but no leaf closes its rule")]
    UnclosedRule { node: usize },
    #[error("assignment covers {got} variables, encoding needs {need}")]
    ShortAssignment { need: usize, got: usize },
    #[error("decision set has {expected} features, dataset has {got}")]
    Arity { expected: usize, got: usize },
    #[error("dataset class '{0}' is unknown to the decision set")]
    UnknownClass(String),
    #[error("invalid model document: {0}")]
    Schema(String),
    #[error("aggregated decoding needs at most two classes")]
    TooManyClasses,
}

impl DecisionSet {
    pub fn new(schema: &Schema, rules: Vec<Rule>) -> DecisionSet {
        let total_size = rules.iter().map(|r| r.nodes).sum();
        DecisionSet {
            classes: schema.classes.clone(),
            class_name: schema.class_name.clone(),
            features: schema.features.clone(),
            rules,
            total_size,
            metadata: Metadata::default(),
            encoding: None,
        }
    }

    pub fn empty(schema: &Schema) -> DecisionSet {
        DecisionSet::new(schema, Vec::new())
    }

    /// Rules of both sets; sizes add up.
    pub fn union(mut self, other: DecisionSet) -> DecisionSet {
        self.total_size += other.total_size;
        self.rules.extend(other.rules);
        self
    }

    /// Sum of normalized body lengths plus one leaf per rule.
    pub fn normalized_size(&self) -> usize {
        self.rules.iter().map(|r| r.body.len() + 1).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decision sets serialize")
    }

    pub fn from_json(text: &str) -> Result<DecisionSet, ModelError> {
        let d: DecisionSet =
            serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Schema(m));
        for (k, r) in self.rules.iter().enumerate() {
            if r.head >= self.classes.len() {
                return bad(format!("rule {k}: head {} out of range", r.head));
            }
            if let Some(l) = r.body.iter().find(|l| l.feature >= self.features.len()) {
                return bad(format!("rule {k}: feature {} out of range", l.feature));
            }
            if r.nodes < r.body.len() + 1 {
                return bad(format!("rule {k}: {} nodes cannot hold its body", r.nodes));
            }
        }
        let sum: usize = self.rules.iter().map(|r| r.nodes).sum();
        if sum != self.total_size {
            return bad(format!("total_size {} but rules use {sum} nodes", self.total_size));
        }
        if let Some(enc) = &self.encoding {
            if enc.feature_names() != self.features {
                return bad("encoding does not match the feature list".into());
            }
        }
        Ok(())
    }

    fn class_label(&self, c: usize) -> String {
        let name = if self.class_name.is_empty() {
            "class"
        } else {
            &self.class_name
        };
        match (self.classes.len(), self.classes[c].as_str()) {
            (2, "1") | (1, "1") if self.classes.iter().all(|x| x == "0" || x == "1") => {
                name.to_string()
            }
            (2, "0") | (1, "0") if self.classes.iter().all(|x| x == "0" || x == "1") => {
                format!("¬{name}")
            }
            (_, label) => format!("{name}={label}"),
        }
    }

    pub fn rule_string(&self, r: &Rule) -> String {
        let body: Vec<String> = r
            .body
            .iter()
            .map(|l| {
                let f = &self.features[l.feature];
                if l.neg {
                    format!("¬{f}")
                } else {
                    f.clone()
                }
            })
            .collect();
        let head = self.class_label(r.head);
        if body.is_empty() {
            format!("⇒ {head}")
        } else {
            format!("{} ⇒ {head}", body.join(" ∧ "))
        }
    }
}

impl fmt::Display for DecisionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", self.rule_string(r))?;
        }
        Ok(())
    }
}

/// Reads the node sequence of a model back into rules.
pub fn decode(
    a: &Assignment,
    vm: &VarMap,
    scope: Scope,
    schema: &Schema,
) -> Result<DecisionSet, ModelError> {
    let need = vm.s.iter().flatten().chain(&vm.t).map(|v| v.index() + 1).max();
    if let Some(need) = need {
        if a.len() < need {
            return Err(ModelError::ShortAssignment { need, got: a.len() });
        }
    }
    if scope == Scope::Aggregated && schema.classes.len() > 2 {
        return Err(ModelError::TooManyClasses);
    }
    let mut rules = Vec::new();
    let mut body: Vec<Literal> = Vec::new();
    let mut open: Option<usize> = None;
    for j in 0..vm.nodes {
        if vm.u.as_ref().is_some_and(|u| a.value(u[j])) {
            continue;
        }
        let t = a.value(vm.t[j]);
        let Some(r) = (0..=vm.features).find(|&r| a.value(vm.s[j][r])) else {
            continue;
        };
        if r == vm.class_feature() {
            let head = match scope {
                Scope::PerClass(c) => c,
                Scope::Aggregated => usize::from(t),
            };
            let nodes = body.len() + 1;
            let mut rule = Rule {
                body: std::mem::take(&mut body),
                head,
                nodes,
            };
            rule.normalize();
            rules.push(rule);
            open = None;
        } else {
            open.get_or_insert(j);
            body.push(Literal {
                feature: r,
                neg: !t,
            });
        }
    }
    if let Some(node) = open {
        return Err(ModelError::UnclosedRule { node });
    }
    Ok(DecisionSet::new(schema, rules))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// The example needs a rule of its class and none covers it.
    Uncovered,
    /// Rule `rule` covers the example but predicts another class.
    WrongClass { rule: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// 0-based example index.
    pub example: usize,
    pub kind: ViolationKind,
}

/// Checks that the set reproduces the training labels within `scope`.
/// Returns the first violating example.
pub fn verify_perfect(dset: &DecisionSet, ds: &BinDataset, scope: Scope) -> Result<(), Violation> {
    for (i, e) in ds.examples.iter().enumerate() {
        let mut own = false;
        for (k, r) in dset.rules.iter().enumerate() {
            if !r.covers(&e.bits) {
                continue;
            }
            if r.head != e.class {
                return Err(Violation {
                    example: i,
                    kind: ViolationKind::WrongClass { rule: k },
                });
            }
            own = true;
        }
        let relevant = match scope {
            Scope::Aggregated => true,
            Scope::PerClass(c) => e.class == c,
        };
        if relevant && !own {
            return Err(Violation {
                example: i,
                kind: ViolationKind::Uncovered,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Correct,
    WrongClassCovered,
    NonClassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Standard,
    Separated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Evaluated examples, counting multiplicities.
    pub m: u64,
    /// Misclassified examples, counting multiplicities.
    pub e: u64,
    /// `(m - e) / m * 100`, or 0 when `m == 0`.
    pub accuracy: f64,
    pub per_example: Vec<Outcome>,
    /// One count per offending class plus one if not covered by its own
    /// class (separated mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separated_misclass: Option<u64>,
}

/// Applies the two misclassification rules: an example covered by a rule of
/// another class is wrong even if its own class also covers it; an example
/// no rule of its class covers is non-classified.
pub fn evaluate(
    dset: &DecisionSet,
    ds: &BinDataset,
    mode: EvalMode,
) -> Result<EvalReport, ModelError> {
    if dset.features.len() != ds.num_features() {
        return Err(ModelError::Arity {
            expected: dset.features.len(),
            got: ds.num_features(),
        });
    }
    let class_map: Vec<usize> = ds
        .classes
        .iter()
        .map(|c| {
            dset.classes
                .iter()
                .position(|d| d == c)
                .ok_or_else(|| ModelError::UnknownClass(c.clone()))
        })
        .collect::<Result<_, _>>()?;
    let (mut m, mut e, mut sep) = (0u64, 0u64, 0u64);
    let mut per_example = Vec::with_capacity(ds.len());
    for ex in &ds.examples {
        let class = class_map[ex.class];
        let mut own = false;
        let mut others = BTreeSet::new();
        for r in dset.rules.iter().filter(|r| r.covers(&ex.bits)) {
            if r.head == class {
                own = true;
            } else {
                others.insert(r.head);
            }
        }
        let outcome = if !others.is_empty() {
            Outcome::WrongClassCovered
        } else if !own {
            Outcome::NonClassified
        } else {
            Outcome::Correct
        };
        m += ex.weight;
        if outcome != Outcome::Correct {
            e += ex.weight;
        }
        sep += ex.weight * (others.len() as u64 + u64::from(!own));
        per_example.push(outcome);
    }
    let accuracy = if m == 0 {
        0.0
    } else {
        (m - e) as f64 / m as f64 * 100.0
    };
    Ok(EvalReport {
        m,
        e,
        accuracy,
        per_example,
        separated_misclass: (mode == EvalMode::Separated).then_some(sep),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{build_bounded, build_perfect, build_sparse};
    use crate::fixtures::{example1, C, L};
    use crate::sat::{SatBackend, SolveResult, Solver, Var};
    use proptest::prelude::*;

    fn lit(feature: usize, neg: bool) -> Literal {
        Literal { feature, neg }
    }

    fn optimal_set() -> DecisionSet {
        let schema = example1().schema();
        DecisionSet::new(
            &schema,
            vec![
                Rule::new(vec![lit(L, false)], 0),
                Rule::new(vec![lit(L, true), lit(C, true)], 1),
                Rule::new(vec![lit(C, false)], 0),
            ],
        )
    }

    /// Assignment realizing a node sequence of (feature, t) pairs on `vm`.
    fn assignment_for(vm: &VarMap, num_vars: usize, nodes: &[(usize, bool)]) -> Assignment {
        let mut values = vec![false; num_vars];
        for (j, &(r, t)) in nodes.iter().enumerate() {
            values[vm.s[j][r].index()] = true;
            values[vm.t[j].index()] = t;
        }
        if let Some(u) = &vm.u {
            for &Var(x) in &u[nodes.len()..] {
                values[x as usize] = true;
            }
        }
        Assignment::new(values)
    }

    #[test]
    fn decodes_the_example_sequence() {
        let ds = example1();
        let b = build_perfect(&ds, 7, Scope::Aggregated).unwrap();
        let h = ds.num_features();
        let seq = [
            (L, true),
            (h, false),
            (L, false),
            (C, false),
            (h, true),
            (C, true),
            (h, false),
        ];
        let a = assignment_for(&b.varmap, b.formula.num_vars, &seq);
        let d = decode(&a, &b.varmap, Scope::Aggregated, &ds.schema()).unwrap();
        assert_eq!(d, optimal_set());
        assert_eq!(d.total_size, 7);
        assert_eq!(d.to_string(), "L ⇒ ¬H\n¬L ∧ ¬C ⇒ H\nC ⇒ ¬H\n");
    }

    #[test]
    fn decodes_single_leaf_and_duplicates() {
        let ds = example1();
        let h = ds.num_features();
        let b = build_bounded(&ds, 3, Scope::Aggregated).unwrap();
        let a = assignment_for(&b.varmap, b.formula.num_vars, &[(h, false)]);
        let d = decode(&a, &b.varmap, Scope::Aggregated, &ds.schema()).unwrap();
        assert_eq!(d.rules, vec![Rule::new(vec![], 0)]);
        assert_eq!(d.total_size, 1);
        assert_eq!(d.to_string(), "⇒ ¬H\n");

        let a = assignment_for(&b.varmap, b.formula.num_vars, &[(L, true), (L, true), (h, true)]);
        let d = decode(&a, &b.varmap, Scope::Aggregated, &ds.schema()).unwrap();
        assert_eq!(d.rules[0].body, vec![lit(L, false)]);
        assert_eq!(d.total_size, 3);
        assert_eq!(d.normalized_size(), 2);
    }

    #[test]
    fn unclosed_rule_is_an_error() {
        let ds = example1();
        let b = build_bounded(&ds, 3, Scope::Aggregated).unwrap();
        let a = assignment_for(&b.varmap, b.formula.num_vars, &[(L, true)]);
        assert_eq!(
            decode(&a, &b.varmap, Scope::Aggregated, &ds.schema()),
            Err(ModelError::UnclosedRule { node: 0 })
        );
    }

    #[test]
    fn verification() {
        let ds = example1();
        assert_eq!(verify_perfect(&optimal_set(), &ds, Scope::Aggregated), Ok(()));
        let constant = DecisionSet::new(&ds.schema(), vec![Rule::new(vec![], 0)]);
        let v = verify_perfect(&constant, &ds, Scope::Aggregated).unwrap_err();
        assert_eq!(v.example, 2);
        assert_eq!(v.kind, ViolationKind::WrongClass { rule: 0 });
        let positive = DecisionSet::new(
            &ds.schema(),
            vec![Rule::new(vec![lit(L, true), lit(C, true)], 1)],
        );
        assert_eq!(verify_perfect(&positive, &ds, Scope::PerClass(1)), Ok(()));
        assert!(verify_perfect(&positive, &ds, Scope::Aggregated).is_err());
    }

    #[test]
    fn accuracy_protocol() {
        let ds = example1();
        let r = evaluate(&optimal_set(), &ds, EvalMode::Standard).unwrap();
        assert_eq!((r.m, r.e, r.accuracy), (8, 0, 100.0));

        let not_l = DecisionSet::new(&ds.schema(), vec![Rule::new(vec![lit(L, true)], 1)]);
        let r = evaluate(&not_l, &ds, EvalMode::Separated).unwrap();
        assert_eq!(r.e, 5);
        assert_eq!(r.accuracy, 37.5);
        use Outcome::*;
        assert_eq!(
            r.per_example,
            vec![
                NonClassified,
                NonClassified,
                Correct,
                NonClassified,
                Correct,
                NonClassified,
                WrongClassCovered,
                Correct
            ]
        );
        // Item 7 is charged twice: covered by H, and no ¬H rule covers it.
        assert_eq!(r.separated_misclass, Some(6));

        let constant = DecisionSet::new(&ds.schema(), vec![Rule::new(vec![], 0)]);
        let r = evaluate(&constant, &ds, EvalMode::Standard).unwrap();
        assert_eq!((r.e, r.accuracy), (3, 62.5));
        assert_eq!(r.separated_misclass, None);
    }

    #[test]
    fn separated_counting_charges_each_offending_class() {
        let ds = example1();
        // Item 7 (index 6) is class 0, covered by a ¬L ⇒ H rule and not by
        // any ¬H rule: one for the wrong class plus one for non-coverage.
        let d = DecisionSet::new(
            &ds.schema(),
            vec![
                Rule::new(vec![lit(L, true)], 1),
                Rule::new(vec![lit(L, false)], 0),
            ],
        );
        let r = evaluate(&d, &ds, EvalMode::Separated).unwrap();
        assert_eq!(r.per_example[6], Outcome::WrongClassCovered);
        assert_eq!(r.e, 1);
        assert_eq!(r.separated_misclass, Some(2));
    }

    #[test]
    fn evaluation_errors_and_empty_data() {
        let ds = example1();
        let mut d = optimal_set();
        d.features.pop();
        assert!(matches!(
            evaluate(&d, &ds, EvalMode::Standard),
            Err(ModelError::Arity { .. })
        ));
        let r = evaluate(&optimal_set(), &ds.subset(&[]), EvalMode::Standard).unwrap();
        assert_eq!((r.m, r.accuracy), (0, 0.0));
    }

    #[test]
    fn contradictory_body_covers_nothing() {
        let ds = example1();
        let text = r#"{"classes":["0","1"],"class_name":"H","features":["L","C","E","S"],
            "rules":[{"body":[{"feature":0,"neg":false},{"feature":0,"neg":true}],"head":1,"nodes":3}],
            "total_size":3}"#;
        let d = DecisionSet::from_json(text).unwrap();
        let r = evaluate(&d, &ds, EvalMode::Standard).unwrap();
        assert!(r.per_example.iter().all(|o| *o != Outcome::WrongClassCovered));
    }

    #[test]
    fn json_documents() {
        let d = optimal_set();
        let json = d.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rules"].as_array().unwrap().len(), 3);
        assert_eq!(v["total_size"], 7);
        assert_eq!(v["rules"][1]["body"][0]["neg"], true);
        assert_eq!(DecisionSet::from_json(&json).unwrap(), d);

        let empty = DecisionSet::empty(&example1().schema());
        let v: serde_json::Value = serde_json::from_str(&empty.to_json()).unwrap();
        assert_eq!(v["rules"], serde_json::json!([]));
        assert_eq!(v["total_size"], 0);
    }

    #[test]
    fn json_schema_violations() {
        for bad in [
            r#"{"classes":["0","1"],"features":["a"],"rules":[],"total_size":1}"#,
            r#"{"classes":["0","1"],"features":["a"],"rules":[{"body":[],"head":2,"nodes":1}],"total_size":1}"#,
            r#"{"classes":["0","1"],"features":["a"],"rules":[{"body":[{"feature":3,"neg":true}],"head":0,"nodes":2}],"total_size":2}"#,
            r#"{"classes":["0","1"],"features":["a"],"rules":[{"body":[{"feature":0,"neg":true}],"head":0,"nodes":1}],"total_size":1}"#,
            r#"{"classes":["0","1"]}"#,
            "not json",
        ] {
            assert!(
                matches!(DecisionSet::from_json(bad), Err(ModelError::Schema(_))),
                "{bad}"
            );
        }
    }

    fn solve_and_decode(ds: &BinDataset, n: usize, scope: Scope) -> Option<DecisionSet> {
        let b = build_perfect(ds, n, scope).unwrap();
        let mut s = Solver::new();
        s.add_formula_hard(&b.formula);
        match s.solve(&[]) {
            SolveResult::Sat(a) => Some(decode(&a, &b.varmap, scope, &ds.schema()).unwrap()),
            _ => None,
        }
    }

    #[test]
    fn solved_models_verify() {
        let ds = example1();
        let d = solve_and_decode(&ds, 7, Scope::Aggregated).unwrap();
        assert_eq!(d.total_size, 7);
        assert_eq!(verify_perfect(&d, &ds, Scope::Aggregated), Ok(()));
        let d = solve_and_decode(&ds, 3, Scope::PerClass(1)).unwrap();
        assert_eq!(verify_perfect(&d, &ds, Scope::PerClass(1)), Ok(()));
        assert!(d.rules.iter().all(|r| r.head == 1));
    }

    #[test]
    fn sparse_flags_bound_the_errors() {
        let ds = example1();
        let b = build_sparse(&ds, 4, 2, Scope::Aggregated).unwrap();
        let mut s = Solver::new();
        s.add_formula_hard(&b.formula);
        let SolveResult::Sat(a) = s.solve(&[]) else {
            panic!()
        };
        let d = decode(&a, &b.varmap, Scope::Aggregated, &ds.schema()).unwrap();
        let flagged: u64 = b
            .varmap
            .m
            .as_ref()
            .unwrap()
            .iter()
            .zip(&ds.examples)
            .filter(|(m, _)| a.value(**m))
            .map(|(_, e)| e.weight)
            .sum();
        let r = evaluate(&d, &ds, EvalMode::Standard).unwrap();
        assert!(flagged >= r.e);
        let unused = b.varmap.u.as_ref().unwrap().iter().filter(|u| a.value(**u)).count();
        assert_eq!(d.total_size, 4 - unused);
    }

    fn arb_set() -> impl Strategy<Value = DecisionSet> {
        let rule = (
            prop::collection::vec((0usize..4, any::<bool>()), 0..4),
            0usize..2,
            0usize..3,
        )
            .prop_map(|(body, head, extra)| {
                let body: Vec<Literal> = body.into_iter().map(|(f, n)| lit(f, n)).collect();
                let nodes = body.len() + 1 + extra;
                let mut r = Rule { body, head, nodes };
                r.normalize();
                r
            });
        (prop::collection::vec(rule, 0..5), any::<Option<u64>>(), any::<bool>()).prop_map(
            |(rules, objective, lam)| {
                let mut d = DecisionSet::new(&example1().schema(), rules);
                d.metadata.objective = objective;
                d.metadata.lambda = lam.then_some(0.25);
                d.metadata.mode = Some("sparse".into());
                d
            },
        )
    }

    proptest! {
        #[test]
        fn json_round_trip(d in arb_set()) {
            prop_assert_eq!(DecisionSet::from_json(&d.to_json()).unwrap(), d);
        }

        #[test]
        fn accuracy_formula(d in arb_set()) {
            let r = evaluate(&d, &example1(), EvalMode::Separated).unwrap();
            let wrong = r.per_example.iter().filter(|o| **o != Outcome::Correct).count() as u64;
            prop_assert_eq!(r.e, wrong);
            prop_assert_eq!(r.accuracy, (r.m - r.e) as f64 / r.m as f64 * 100.0);
            prop_assert!(r.separated_misclass.unwrap() >= r.e);
        }
    }
}
