//! Brute-force ground truth: executions enumerated from raw words and
//! deduplicated by normal form.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{Graphs, PathCounter};
use crate::monoid::{Letter, NormalForm};
use crate::spectral::growth_from_mobius;
use crate::system::{ConcurrentSystem, State};

pub const DEFAULT_CAP: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionSet {
    pub origin: State,
    pub length: usize,
    /// Normal form of each execution, with its target state.
    pub traces: BTreeMap<NormalForm, State>,
    /// Execution count per target state.
    pub by_target: Vec<usize>,
}

impl ExecutionSet {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn to(&self, target: State) -> impl Iterator<Item = &NormalForm> {
        self.traces.iter().filter(move |(_, &t)| t == target).map(|(nf, _)| nf)
    }
}

/// All executions of length `n` from `origin`. Words are extended letter by
/// letter and abandoned as soon as they reach ⊥.
pub fn enumerate_executions(sys: &ConcurrentSystem, origin: State, n: usize, cap: usize) -> Result<ExecutionSet> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut traces = BTreeMap::new();
    let mut word: Vec<Letter> = Vec::with_capacity(n);
    fn walk(
        sys: &ConcurrentSystem,
        state: State,
        n: usize,
        word: &mut Vec<Letter>,
        out: &mut BTreeMap<NormalForm, State>,
    ) {
        if word.len() == n {
            out.insert(sys.monoid().normal_form(word), state);
            return;
        }
        for a in sys.monoid().letters() {
            if let Some(next) = sys.step(state, a) {
                word.push(a);
                walk(sys, next, n, word, out);
                word.pop();
            }
        }
    }
    walk(sys, origin, n, &mut word, &mut traces);
    let mut by_target = vec![0; sys.num_states()];
    for &t in traces.values() {
        by_target[t] += 1;
    }
    debug_assert!(traces
        .keys()
        .all(|nf| nf.len() == n && sys.act(origin, &nf.to_word()).is_some()));
    Ok(ExecutionSet {
        origin,
        length: n,
        traces,
        by_target,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub n: usize,
    pub from: String,
    pub to: String,
    pub oracle: String,
    pub paths: String,
    pub mobius: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub order: usize,
    /// `counts[n][α][β]` from the oracle.
    pub counts: Vec<Vec<Vec<usize>>>,
    pub mismatches: Vec<Mismatch>,
    pub pass: bool,
}

/// Compares, for every `n ≤ order` and state pair, the oracle count, the
/// ADSC path count and the coefficient of `μ⁻¹`; all exactly.
pub fn cross_check(sys: &ConcurrentSystem, graphs: &Graphs, order: usize, cap: usize) -> Result<CrossCheckReport> {
    if order > cap {
        return Err(Error::CapExceeded { n: order, cap });
    }
    let d = sys.num_states();
    let paths = PathCounter::new(&graphs.adsc, d).table(order);
    let mobius = growth_from_mobius(sys, order);
    let mut counts = Vec::with_capacity(order + 1);
    let mut mismatches = Vec::new();
    for n in 0..=order {
        let mut layer = Vec::with_capacity(d);
        for a in 0..d {
            let set = enumerate_executions(sys, a, n, cap)?;
            for b in 0..d {
                let o = BigInt::from(set.by_target[b]);
                let p = BigInt::from(paths[n][a][b].clone());
                let mu = &mobius[n][a][b];
                if o != p || &o != mu {
                    mismatches.push(Mismatch {
                        n,
                        from: sys.state_name(a).to_string(),
                        to: sys.state_name(b).to_string(),
                        oracle: o.to_string(),
                        paths: p.to_string(),
                        mobius: mu.to_string(),
                    });
                }
            }
            layer.push(set.by_target);
        }
        counts.push(layer);
    }
    Ok(CrossCheckReport {
        order,
        counts,
        pass: mismatches.is_empty(),
        mismatches,
    })
}
