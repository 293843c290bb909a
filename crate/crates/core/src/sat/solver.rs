//! Conflict-driven clause-learning solver.
//!
//! Two-watched-literal propagation with blockers, first-UIP learning with
//! local minimization, VSIDS branching with phase saving, Luby restarts and
//! activity-based learnt-clause reduction. Assumptions occupy the first
//! decision levels; a failed assumption yields a core via final-conflict
//! analysis.
//!
//! With `learning` disabled the solver degrades to chronological DPLL over
//! the same propagation engine. It exists as a reference configuration for
//! testing.

use std::time::Instant;

use super::{Assignment, ClauseSink, Lit, SatBackend, SolveResult, Var};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub learning: bool,
    pub restarts: bool,
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Conflicts in the first restart interval, scaled by the Luby sequence.
    pub restart_base: u64,
    /// Conflict cap per `solve` call; `None` means unbounded.
    pub conflict_budget: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            learning: true,
            restarts: true,
            var_decay: 0.95,
            clause_decay: 0.999,
            restart_base: 100,
            conflict_budget: None,
        }
    }
}

impl SolverConfig {
    /// Chronological backtracking without learning or restarts.
    pub fn no_learning() -> Self {
        SolverConfig {
            learning: false,
            restarts: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnts: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum LBool {
    True,
    False,
    Undef,
}

type CRef = u32;

#[derive(Clone, Copy)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Max-heap of variables ordered by activity.
#[derive(Default)]
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarOrder {
    fn grow(&mut self) {
        self.pos.push(None);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.sift_up(i, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq as i32)
}

enum SearchStatus {
    Sat,
    Unsat,
    Restart,
    Budget,
}

pub struct Solver {
    config: SolverConfig,
    clauses: Vec<ClauseData>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarOrder,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    // DPLL mode: whether the decision at level d+1 has already been flipped.
    flipped: Vec<bool>,
    ok: bool,
    max_learnts: f64,
    core: Vec<Lit>,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Self::with_config(SolverConfig::default())
    }

    pub fn with_config(config: SolverConfig) -> Self {
        Solver {
            config,
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarOrder::default(),
            polarity: Vec::new(),
            seen: Vec::new(),
            flipped: Vec::new(),
            ok: true,
            max_learnts: 0.0,
            core: Vec::new(),
            stats: SolverStats::default(),
        }
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// False once the clause set is known to be unsatisfiable.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| !c.learnt && !c.deleted).count()
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.assigns.len() as u32;
        self.assigns.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.polarity.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.grow();
        self.order.insert(v, &self.activity);
        Var(v)
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            self.new_var();
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    #[inline]
    fn value(&self, l: Lit) -> LBool {
        lit_value(&self.assigns, l)
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a clause at the root level. Returns `false` if the solver is now
    /// unsatisfiable. Unregistered variables are created on demand.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        if let Some(max) = lits.iter().map(|l| l.var().index()).max() {
            self.ensure_vars(max + 1);
        }
        let mut ps: Vec<Lit> = lits.to_vec();
        ps.sort_unstable();
        ps.dedup();
        let mut out = Vec::with_capacity(ps.len());
        for (i, &l) in ps.iter().enumerate() {
            if self.value(l) == LBool::True || (i + 1 < ps.len() && ps[i + 1] == !l) {
                return true;
            }
            if self.value(l) == LBool::Undef {
                out.push(l);
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(out[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach_new(out, false);
                true
            }
        }
    }

    fn attach_new(&mut self, lits: Vec<Lit>, learnt: bool) -> CRef {
        let cref = self.clauses.len() as CRef;
        self.watches[(!lits[0]).code()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[(!lits[1]).code()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
            self.stats.learnts += 1;
        }
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: Option<CRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = if l.is_pos() {
            LBool::True
        } else {
            LBool::False
        };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.polarity[v] = l.is_pos();
            self.order.insert(v as u32, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl);
        self.flipped.truncate(lvl);
        self.qhead = start;
    }

    /// Unit propagation. Returns the conflicting clause, if any.
    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            'watchers: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_value(&self.assigns, w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cd = &mut self.clauses[w.cref as usize];
                if cd.deleted {
                    continue;
                }
                let lits = &mut cd.lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let nw = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && lit_value(&self.assigns, first) == LBool::True {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                for k in 2..lits.len() {
                    if lit_value(&self.assigns, lits[k]) != LBool::False {
                        lits.swap(1, k);
                        let watch_on = !lits[1];
                        self.watches[watch_on.code()].push(nw);
                        continue 'watchers;
                    }
                }
                ws[j] = nw;
                j += 1;
                if lit_value(&self.assigns, first) == LBool::False {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    let v = first.var().index();
                    self.assigns[v] = if first.is_pos() {
                        LBool::True
                    } else {
                        LBool::False
                    };
                    self.level[v] = self.trail_lim.len() as u32;
                    self.reason[v] = Some(w.cref);
                    self.trail.push(first);
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        let cd = &mut self.clauses[cref as usize];
        if !cd.learnt {
            return;
        }
        cd.activity += self.cla_inc;
        if cd.activity > 1e20 {
            for &c in &self.learnts {
                self.clauses[c as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit::new(Var(0), true)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let cur = self.decision_level() as u32;
        loop {
            self.bump_clause(confl);
            let start = if p.is_none() { 0 } else { 1 };
            let n = self.clauses[confl as usize].lits.len();
            for k in start..n {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= cur {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().index()] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[pl.var().index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.var().index()].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();

        // Drop literals whose reason is subsumed by the rest of the clause.
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                if i == 0 {
                    return true;
                }
                match self.reason[l.var().index()] {
                    None => true,
                    Some(r) => self.clauses[r as usize].lits[1..].iter().any(|q| {
                        let v = q.var().index();
                        !self.seen[v] && self.level[v] > 0
                    }),
                }
            })
            .collect();
        for l in &learnt[1..] {
            self.seen[l.var().index()] = false;
        }
        let mut learnt: Vec<Lit> = learnt
            .into_iter()
            .zip(keep)
            .filter_map(|(l, k)| k.then_some(l))
            .collect();

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        (learnt, bt)
    }

    /// Assumptions responsible for `p` (an assumption) being false.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut core = vec![p];
        let pv = p.var().index();
        if self.level[pv] == 0 {
            return core;
        }
        self.seen[pv] = true;
        let start = self.trail_lim[0];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                // Decisions below the assumption frontier are assumptions.
                None => core.push(l),
                Some(r) => {
                    let n = self.clauses[r as usize].lits.len();
                    for k in 1..n {
                        let q = self.clauses[r as usize].lits[k];
                        if self.level[q.var().index()] > 0 {
                            self.seen[q.var().index()] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[pv] = false;
        core.dedup();
        core
    }

    fn reduce_db(&mut self) {
        let mut learnts = std::mem::take(&mut self.learnts);
        learnts.retain(|&c| !self.clauses[c as usize].deleted);
        learnts.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            (ca.lits.len() > 2)
                .cmp(&(cb.lits.len() > 2))
                .reverse()
                .then(ca.activity.total_cmp(&cb.activity))
        });
        let limit = self.cla_inc / learnts.len().max(1) as f64;
        let half = learnts.len() / 2;
        let mut kept = Vec::with_capacity(learnts.len());
        for (i, &c) in learnts.iter().enumerate() {
            let cd = &self.clauses[c as usize];
            let removable = cd.lits.len() > 2
                && !self.locked(c)
                && (i < half || cd.activity < limit);
            if removable {
                let cd = &mut self.clauses[c as usize];
                cd.deleted = true;
                cd.lits = Vec::new();
            } else {
                kept.push(c);
            }
        }
        self.learnts = kept;
    }

    fn locked(&self, c: CRef) -> bool {
        let first = self.clauses[c as usize].lits[0];
        self.reason[first.var().index()] == Some(c) && self.value(first) == LBool::True
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == LBool::Undef {
                return Some(Var(v).lit(self.polarity[v as usize]));
            }
        }
        None
    }

    /// DPLL conflict handling: flip the deepest unflipped branching decision.
    fn backtrack_chronological(&mut self, num_assumptions: usize) -> bool {
        let mut d = self.decision_level();
        while d > num_assumptions {
            if !self.flipped[d - 1] {
                let decision = self.trail[self.trail_lim[d - 1]];
                self.cancel_until(d - 1);
                self.new_decision_level();
                self.flipped.push(true);
                self.enqueue(!decision, None);
                return true;
            }
            d -= 1;
        }
        false
    }

    fn search(
        &mut self,
        nof_conflicts: Option<u64>,
        assumptions: &[Lit],
        deadline: Option<Instant>,
        conflict_cap: Option<u64>,
    ) -> SearchStatus {
        let mut conflicts_here = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SearchStatus::Unsat;
                }
                if self.config.learning {
                    let (learnt, bt) = self.analyze(confl);
                    self.cancel_until(bt);
                    if learnt.len() == 1 {
                        self.enqueue(learnt[0], None);
                    } else {
                        let first = learnt[0];
                        let cref = self.attach_new(learnt, true);
                        self.bump_clause(cref);
                        self.enqueue(first, Some(cref));
                    }
                    self.var_inc /= self.config.var_decay;
                    self.cla_inc /= self.config.clause_decay;
                } else if !self.backtrack_chronological(assumptions.len()) {
                    self.core = assumptions.to_vec();
                    return SearchStatus::Unsat;
                }
                if conflict_cap.is_some_and(|cap| self.stats.conflicts >= cap) {
                    return SearchStatus::Budget;
                }
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    return SearchStatus::Budget;
                }
            } else {
                if nof_conflicts.is_some_and(|n| conflicts_here >= n) {
                    self.cancel_until(0);
                    self.stats.restarts += 1;
                    return SearchStatus::Restart;
                }
                if self.config.learning
                    && self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts
                {
                    self.reduce_db();
                }

                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let a = assumptions[self.decision_level()];
                    match self.value(a) {
                        LBool::True => {
                            self.new_decision_level();
                            self.flipped.push(true);
                        }
                        LBool::False => {
                            self.core = self.analyze_final(a);
                            return SearchStatus::Unsat;
                        }
                        LBool::Undef => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(a) => {
                        self.new_decision_level();
                        self.flipped.push(true);
                        a
                    }
                    None => {
                        self.stats.decisions += 1;
                        if self.stats.decisions.is_multiple_of(1024)
                            && deadline.is_some_and(|d| Instant::now() >= d)
                        {
                            return SearchStatus::Budget;
                        }
                        match self.pick_branch() {
                            None => return SearchStatus::Sat,
                            Some(l) => {
                                self.new_decision_level();
                                self.flipped.push(false);
                                l
                            }
                        }
                    }
                };
                self.enqueue(next, None);
            }
        }
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        self.solve_until(assumptions, None)
    }

    /// Solves under `assumptions`, giving up at `deadline` or when the
    /// configured conflict budget is spent.
    pub fn solve_until(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> SolveResult {
        self.stats.solves += 1;
        self.core.clear();
        if !self.ok {
            return SolveResult::Unsat(Vec::new());
        }
        if let Some(max) = assumptions.iter().map(|l| l.var().index()).max() {
            self.ensure_vars(max + 1);
        }
        self.max_learnts = (self.num_clauses() as f64 / 3.0).max(1000.0);
        let conflict_cap = self
            .config
            .conflict_budget
            .map(|b| self.stats.conflicts + b);
        let mut round = 0u64;
        let status = loop {
            let nof = if self.config.restarts {
                Some((luby(2.0, round) * self.config.restart_base as f64) as u64)
            } else {
                None
            };
            match self.search(nof, assumptions, deadline, conflict_cap) {
                SearchStatus::Restart => {
                    round += 1;
                    self.max_learnts *= 1.05;
                }
                s => break s,
            }
        };
        let result = match status {
            SearchStatus::Sat => {
                let values = self.assigns.iter().map(|&a| a == LBool::True).collect();
                SolveResult::Sat(Assignment::new(values))
            }
            SearchStatus::Unsat => {
                if self.ok {
                    SolveResult::Unsat(std::mem::take(&mut self.core))
                } else {
                    SolveResult::Unsat(Vec::new())
                }
            }
            SearchStatus::Budget | SearchStatus::Restart => SolveResult::Unknown,
        };
        self.cancel_until(0);
        result
    }
}

#[inline]
fn lit_value(assigns: &[LBool], l: Lit) -> LBool {
    match assigns[l.var().index()] {
        LBool::Undef => LBool::Undef,
        LBool::True => {
            if l.is_pos() {
                LBool::True
            } else {
                LBool::False
            }
        }
        LBool::False => {
            if l.is_pos() {
                LBool::False
            } else {
                LBool::True
            }
        }
    }
}

impl ClauseSink for Solver {
    fn new_var(&mut self) -> Var {
        Solver::new_var(self)
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        Solver::add_clause(self, lits);
    }
}

impl SatBackend for Solver {
    fn num_vars(&self) -> usize {
        Solver::num_vars(self)
    }

    fn solve_until(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> SolveResult {
        Solver::solve_until(self, assumptions, deadline)
    }

    fn conflicts(&self) -> u64 {
        self.stats.conflicts
    }
}
