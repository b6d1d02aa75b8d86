//! Random systems for property tests.

#![allow(dead_code)]

use concsys::{ConcurrentSystem, Error, TraceMonoid};
use proptest::collection::vec;
use proptest::prelude::*;

pub const LETTERS: [&str; 12] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"];

pub fn monoid_from(k: usize, indep: &[bool]) -> TraceMonoid {
    let mut pairs = Vec::new();
    let mut idx = 0;
    for (i, &a) in LETTERS[..k].iter().enumerate() {
        for &b in &LETTERS[i + 1..k] {
            if indep[idx] {
                pairs.push((a, b));
            }
            idx += 1;
        }
    }
    TraceMonoid::new(&LETTERS[..k], &pairs).unwrap()
}

pub fn arb_monoid(max_letters: usize) -> impl Strategy<Value = TraceMonoid> {
    (1..=max_letters)
        .prop_flat_map(|k| (Just(k), vec(any::<bool>(), k * (k - 1) / 2)))
        .prop_map(|(k, indep)| monoid_from(k, &indep))
}

/// Turns an arbitrary table into a valid system: while some diamond fails
/// at `(α, a, b)`, the defined one of `α·a`, `α·b` is cut to ⊥. Each round
/// adds a ⊥, so this terminates.
pub fn repaired(monoid: TraceMonoid, n: usize, mut action: Vec<Option<usize>>, base: usize) -> ConcurrentSystem {
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let k = monoid.len();
    loop {
        match ConcurrentSystem::from_table(monoid.clone(), states.clone(), action.clone(), base) {
            Ok(sys) => return sys,
            Err(Error::DiamondViolation { state, a, b }) => {
                let s: usize = state[1..].parse().unwrap();
                let a = monoid.letter(&a).unwrap().0;
                let b = monoid.letter(&b).unwrap().0;
                if action[s * k + a].is_some() {
                    action[s * k + a] = None;
                } else {
                    action[s * k + b] = None;
                }
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

pub fn arb_system(max_letters: usize, max_states: usize) -> impl Strategy<Value = ConcurrentSystem> {
    (1..=max_letters, 1..=max_states)
        .prop_flat_map(|(k, n)| {
            (
                Just(k),
                Just(n),
                vec(any::<bool>(), k * (k - 1) / 2),
                // Value `n` and above stands for ⊥; weights favour defined moves.
                vec(0..n + n.div_ceil(2), n * k),
                0..n,
            )
        })
        .prop_map(|(k, n, indep, table, base)| {
            let action = table.into_iter().map(|t| (t < n).then_some(t)).collect();
            repaired(monoid_from(k, &indep), n, action, base)
        })
}

pub fn arb_word(k: usize, max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    vec(0..k, 0..=max_len)
}
