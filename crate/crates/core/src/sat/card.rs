//! Cardinality encodings: exactly-one (pairwise or ladder), the totalizer,
//! and a weighted sum built by merging one totalizer per weight class.

use std::collections::BTreeMap;

use super::{ClauseSink, Lit};

/// Largest set encoded pairwise by [`exactly_one`]; larger sets use the ladder.
pub const PAIRWISE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmoEncoding {
    Pairwise,
    /// Sequential counter with one auxiliary per literal but the last.
    Ladder,
}

/// Emits clauses forcing exactly one of `lits` true.
pub fn exactly_one<S: ClauseSink + ?Sized>(sink: &mut S, lits: &[Lit]) {
    let enc = if lits.len() <= PAIRWISE_LIMIT {
        AmoEncoding::Pairwise
    } else {
        AmoEncoding::Ladder
    };
    exactly_one_with(sink, lits, enc);
}

pub fn exactly_one_with<S: ClauseSink + ?Sized>(sink: &mut S, lits: &[Lit], enc: AmoEncoding) {
    assert!(!lits.is_empty(), "exactly-one over an empty set");
    sink.add_clause(lits);
    at_most_one_with(sink, lits, enc);
}

pub fn at_most_one_with<S: ClauseSink + ?Sized>(sink: &mut S, lits: &[Lit], enc: AmoEncoding) {
    if lits.len() < 2 {
        return;
    }
    match enc {
        AmoEncoding::Pairwise => {
            for (i, &a) in lits.iter().enumerate() {
                for &b in &lits[i + 1..] {
                    sink.add_clause(&[!a, !b]);
                }
            }
        }
        AmoEncoding::Ladder => {
            let n = lits.len();
            // y[i] holds once any of lits[0..=i] is true.
            let ys: Vec<Lit> = (0..n - 1).map(|_| sink.new_var().pos()).collect();
            for i in 0..n - 1 {
                sink.add_clause(&[!lits[i], ys[i]]);
                sink.add_clause(&[!ys[i], !lits[i + 1]]);
                if i + 1 < n - 1 {
                    sink.add_clause(&[!ys[i], ys[i + 1]]);
                }
            }
        }
    }
}

/// Unary counter over a set of input literals. `outputs[t - 1]` holds iff at
/// least `t` inputs hold.
#[derive(Debug, Clone)]
pub struct Totalizer {
    inputs: Vec<Lit>,
    outputs: Vec<Lit>,
}

impl Totalizer {
    /// Full totalizer with outputs for every count `1..=inputs.len()`.
    pub fn build<S: ClauseSink + ?Sized>(sink: &mut S, inputs: &[Lit]) -> Totalizer {
        Self::build_limited(sink, inputs, inputs.len())
    }

    /// Totalizer whose outputs stop at `limit`; the last output then reads
    /// "at least `limit`". Counts up to `limit` stay exact.
    pub fn build_limited<S: ClauseSink + ?Sized>(
        sink: &mut S,
        inputs: &[Lit],
        limit: usize,
    ) -> Totalizer {
        assert!(!inputs.is_empty(), "totalizer over an empty set");
        let limit = limit.clamp(1, inputs.len());
        let outputs = Self::node(sink, inputs, limit);
        Totalizer {
            inputs: inputs.to_vec(),
            outputs,
        }
    }

    fn node<S: ClauseSink + ?Sized>(sink: &mut S, inputs: &[Lit], limit: usize) -> Vec<Lit> {
        if inputs.len() == 1 {
            return vec![inputs[0]];
        }
        let mid = inputs.len() / 2;
        let a = Self::node(sink, &inputs[..mid], limit);
        let b = Self::node(sink, &inputs[mid..], limit);
        let width = (a.len() + b.len()).min(limit);
        let out: Vec<Lit> = (0..width).map(|_| sink.new_var().pos()).collect();
        let (p, q) = (a.len(), b.len());
        for i in 0..=p {
            for j in 0..=q {
                // a_i & b_j -> out_{i+j}
                if i + j >= 1 {
                    let mut c = Vec::with_capacity(3);
                    if i > 0 {
                        c.push(!a[i - 1]);
                    }
                    if j > 0 {
                        c.push(!b[j - 1]);
                    }
                    c.push(out[(i + j).min(width) - 1]);
                    sink.add_clause(&c);
                }
                // !a_{i+1} & !b_{j+1} -> !out_{i+j+1}
                if i + j < width {
                    let mut c = Vec::with_capacity(3);
                    if i < p {
                        c.push(a[i]);
                    }
                    if j < q {
                        c.push(b[j]);
                    }
                    c.push(!out[i + j]);
                    sink.add_clause(&c);
                }
            }
        }
        out
    }

    pub fn inputs(&self) -> &[Lit] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    /// Literal meaning "at least `t` inputs are true", `t >= 1`.
    pub fn at_least(&self, t: usize) -> Option<Lit> {
        t.checked_sub(1).and_then(|i| self.outputs.get(i)).copied()
    }

    /// Assumption enforcing "at most `k` inputs are true", or `None` when the
    /// bound is vacuous.
    pub fn at_most(&self, k: usize) -> Option<Lit> {
        self.at_least(k + 1).map(|l| !l)
    }
}

/// Weighted sum of literals, realized as one totalizer per distinct weight
/// merged pairwise into sum outputs. Only the upward direction is encoded
/// (inputs force outputs), which is what upper bounds need. Sums above `cap`
/// collapse into a single overflow output `cap + 1`.
#[derive(Debug, Clone)]
pub struct WeightedSum {
    /// Sorted by value; each output implies every smaller one.
    outputs: Vec<(u64, Lit)>,
    cap: u64,
}

impl WeightedSum {
    pub fn build<S: ClauseSink + ?Sized>(sink: &mut S, terms: &[(Lit, u64)], cap: u64) -> Self {
        let mut by_weight: BTreeMap<u64, Vec<Lit>> = BTreeMap::new();
        for &(l, w) in terms {
            if w > 0 {
                by_weight.entry(w).or_default().push(l);
            }
        }
        let clamp = |v: u64| v.min(cap + 1);
        let mut layer: Vec<Vec<(u64, Lit)>> = by_weight
            .into_iter()
            .map(|(w, lits)| {
                let limit = (cap / w + 1) as usize;
                let tot = Totalizer::build_limited(sink, &lits, limit);
                let mut outs: Vec<(u64, Lit)> = Vec::new();
                for (t, &o) in tot.outputs().iter().enumerate() {
                    let v = clamp(w.saturating_mul(t as u64 + 1));
                    // Overflow outputs of one group collapse onto the first.
                    if outs.last().is_some_and(|&(pv, _)| pv == v) {
                        continue;
                    }
                    outs.push((v, o));
                }
                outs
            })
            .collect();
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            let mut it = layer.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(Self::merge(sink, &a, &b, cap)),
                    None => next.push(a),
                }
            }
            layer = next;
        }
        let outputs = layer.pop().unwrap_or_default();
        for w in outputs.windows(2) {
            sink.add_clause(&[!w[1].1, w[0].1]);
        }
        WeightedSum { outputs, cap }
    }

    fn merge<S: ClauseSink + ?Sized>(
        sink: &mut S,
        a: &[(u64, Lit)],
        b: &[(u64, Lit)],
        cap: u64,
    ) -> Vec<(u64, Lit)> {
        let mut sums: BTreeMap<u64, Lit> = BTreeMap::new();
        let zero = std::iter::once((0u64, None));
        let a_ext: Vec<(u64, Option<Lit>)> =
            zero.clone().chain(a.iter().map(|&(v, l)| (v, Some(l)))).collect();
        let b_ext: Vec<(u64, Option<Lit>)> =
            zero.chain(b.iter().map(|&(v, l)| (v, Some(l)))).collect();
        for &(va, la) in &a_ext {
            for &(vb, lb) in &b_ext {
                let v = (va + vb).min(cap + 1);
                if v == 0 {
                    continue;
                }
                let o = *sums.entry(v).or_insert_with(|| sink.new_var().pos());
                let mut c = Vec::with_capacity(3);
                c.extend(la.map(|l| !l));
                c.extend(lb.map(|l| !l));
                c.push(o);
                sink.add_clause(&c);
            }
        }
        sums.into_iter().collect()
    }

    pub fn outputs(&self) -> &[(u64, Lit)] {
        &self.outputs
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Assumption enforcing "sum <= k" for `k <= cap`, or `None` when no
    /// achievable sum exceeds `k`.
    pub fn at_most(&self, k: u64) -> Option<Lit> {
        debug_assert!(k <= self.cap);
        self.outputs
            .iter()
            .find(|&&(v, _)| v > k)
            .map(|&(_, l)| !l)
    }
}
