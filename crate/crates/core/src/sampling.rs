//! Random executions: prefixes under the uniform measure via the Markov
//! chain of states-and-cliques, and exactly uniform executions of a given
//! length.
//!
//! All randomness comes from PCG32 generators whose state and stream are
//! derived from `(seed, stream id)` by SplitMix64, so outputs depend only on
//! the inputs and the seed.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngExt};
use rand_pcg::Pcg32;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{Graphs, StateCliqueGraph};
use crate::measure::UniformMeasure;
use crate::monoid::{Clique, Letter};
use crate::system::{ConcurrentSystem, State};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> Pcg32 {
    let h = splitmix64(seed ^ splitmix64(stream));
    Pcg32::new(h, splitmix64(h ^ stream))
}

/// Inverse-CDF draw over `(item, weight)` pairs in the given order. The
/// weights need not be normalized.
fn draw<R: Rng>(rng: &mut R, items: &[(usize, f64)]) -> Option<usize> {
    let total: f64 = items.iter().map(|&(_, w)| w.max(0.0)).sum();
    if total <= 0.0 {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for &(i, w) in items {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if u < acc {
            return Some(i);
        }
    }
    last
}

/// Uniform integer in `0..bound`, by rejection on the bit length.
pub fn random_below<R: Rng>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    if let Some(b) = bound.to_u64() {
        return BigUint::from(rng.random_range(0..b));
    }
    let bits = bound.bits();
    let words = bits.div_ceil(64) as usize;
    let top = bits % 64;
    loop {
        let mut digits: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
        if top != 0 {
            digits[words - 1] &= (1u64 << top) - 1;
        }
        let x = BigUint::from_slice(
            &digits
                .iter()
                .flat_map(|d| [*d as u32, (d >> 32) as u32])
                .collect::<Vec<u32>>(),
        );
        if &x < bound {
            return x;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampledExecution {
    pub start: State,
    /// DSC node indices.
    pub nodes: Vec<usize>,
    pub trace: Vec<Letter>,
    pub seed: u64,
}

/// Runs the chain from `start`: first node from `h_start`, then `steps − 1`
/// transitions.
pub fn sample_mcsc(
    graphs: &Graphs,
    measure: &UniformMeasure,
    start: State,
    steps: usize,
    seed: u64,
) -> SampledExecution {
    let mut rng = rng_for(seed, 0);
    let dsc = &graphs.dsc;
    let mut nodes = Vec::with_capacity(steps);
    if steps > 0 {
        if let Some(first) = draw(&mut rng, &measure.chain.initial[start]) {
            nodes.push(first);
            while nodes.len() < steps {
                let cur = *nodes.last().unwrap();
                let row: Vec<(usize, f64)> = dsc
                    .graph
                    .successors(cur)
                    .iter()
                    .map(|&j| (j, measure.chain.transition[cur][j]))
                    .collect();
                match draw(&mut rng, &row) {
                    Some(next) => nodes.push(next),
                    None => break,
                }
            }
        }
    }
    let trace = nodes.iter().flat_map(|&i| dsc.nodes[i].clique.letters()).collect();
    SampledExecution {
        start,
        nodes,
        trace,
        seed,
    }
}

/// Transition counts between consecutive nodes of a chain run.
pub fn transition_counts(num_nodes: usize, nodes: &[usize]) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; num_nodes]; num_nodes];
    for w in nodes.windows(2) {
        counts[w[0]][w[1]] += 1;
    }
    counts
}

/// Exactly uniform sampler over the executions of length `n` from a state,
/// by backward path counts on the ADSC.
#[derive(Clone, Debug)]
pub struct UniformSampler<'a> {
    adsc: &'a StateCliqueGraph,
    start: State,
    n: usize,
    /// `weights[k][v]`: paths of `k + 1` nodes from `v` ending at a chain end.
    weights: Vec<Vec<BigUint>>,
    total: BigUint,
}

impl<'a> UniformSampler<'a> {
    pub fn new(adsc: &'a StateCliqueGraph, start: State, n: usize) -> Result<Self> {
        let len = adsc.len();
        let mut weights: Vec<Vec<BigUint>> = Vec::with_capacity(n);
        if n > 0 {
            weights.push(
                adsc.nodes
                    .iter()
                    .map(|v| {
                        if v.pos == v.clique.len() {
                            BigUint::one()
                        } else {
                            BigUint::zero()
                        }
                    })
                    .collect(),
            );
        }
        for k in 1..n {
            let prev = &weights[k - 1];
            let next = (0..len)
                .map(|v| adsc.graph.successors(v).iter().map(|&w| &prev[w]).sum())
                .collect();
            weights.push(next);
        }
        let total = if n == 0 {
            BigUint::one()
        } else {
            (0..len)
                .filter(|&v| adsc.nodes[v].state == start && adsc.nodes[v].pos == 1)
                .map(|v| &weights[n - 1][v])
                .sum()
        };
        if total.is_zero() {
            return Err(Error::EmptySet(n));
        }
        Ok(UniformSampler {
            adsc,
            start,
            n,
            weights,
            total,
        })
    }

    /// `#ℳ_start(n)`.
    pub fn count(&self) -> &BigUint {
        &self.total
    }

    fn pick<R: Rng>(&self, rng: &mut R, candidates: impl Iterator<Item = usize>, k: usize, total: &BigUint) -> usize {
        let mut x = random_below(rng, total);
        for v in candidates {
            let w = &self.weights[k][v];
            if &x < w {
                return v;
            }
            x -= w;
        }
        unreachable!("weights sum to the total")
    }

    /// ADSC path with `n` nodes.
    pub fn sample_path<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        if self.n == 0 {
            return Vec::new();
        }
        let adsc = self.adsc;
        let starts = (0..adsc.len()).filter(|&v| adsc.nodes[v].state == self.start && adsc.nodes[v].pos == 1);
        let mut path = vec![self.pick(rng, starts, self.n - 1, &self.total)];
        for k in (0..self.n - 1).rev() {
            let cur = *path.last().unwrap();
            let total = &self.weights[k + 1][cur];
            let next = self.pick(rng, adsc.graph.successors(cur).iter().copied(), k, total);
            path.push(next);
        }
        path
    }

    pub fn word_of_path(&self, path: &[usize]) -> Vec<Letter> {
        path.iter()
            .map(|&v| {
                let n = &self.adsc.nodes[v];
                n.clique.letters().nth(n.pos - 1).expect("position inside clique")
            })
            .collect()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Letter> {
        let path = self.sample_path(rng);
        self.word_of_path(&path)
    }
}

/// One uniform execution of length `n` from `start`.
pub fn sample_uniform_finite(graphs: &Graphs, start: State, n: usize, seed: u64) -> Result<Vec<Letter>> {
    let sampler = UniformSampler::new(&graphs.adsc, start, n)?;
    Ok(sampler.sample(&mut rng_for(seed, 0)))
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstCliqueReport {
    pub cliques: Vec<String>,
    pub expected: Vec<f64>,
    pub observed: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub total_variation: f64,
    pub samples: usize,
}

/// First-clique frequencies of uniform length-`n` executions against the
/// first-clique law `h_start` of the uniform measure.
pub fn empirical_first_clique(
    sys: &ConcurrentSystem,
    graphs: &Graphs,
    measure: &UniformMeasure,
    start: State,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<FirstCliqueReport> {
    let enabled: Vec<Clique> = sys.enabled_cliques(start);
    let sampler = UniformSampler::new(&graphs.adsc, start, n)?;
    let mut rng = rng_for(seed, 0);
    let mut counts = vec![0u64; enabled.len()];
    for _ in 0..samples {
        let path = sampler.sample_path(&mut rng);
        let Some(&first) = path.first() else { continue };
        let c = graphs.adsc.nodes[first].clique;
        let k = enabled.iter().position(|&d| d == c).expect("first clique is enabled");
        counts[k] += 1;
    }
    let expected: Vec<f64> = enabled.iter().map(|&c| measure.h(start, c)).collect();
    let total = samples.max(1) as f64;
    let observed: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let z_scores = expected
        .iter()
        .zip(&counts)
        .map(|(&p, &c)| {
            let var = total * p * (1.0 - p);
            let diff = c as f64 - total * p;
            if var > 0.0 {
                diff / var.sqrt()
            } else if diff.abs() < 0.5 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let total_variation = 0.5 * expected.iter().zip(&observed).map(|(p, q)| (p - q).abs()).sum::<f64>();
    Ok(FirstCliqueReport {
        cliques: enabled.iter().map(|&c| sys.monoid().clique_name(c)).collect(),
        expected,
        observed,
        z_scores,
        total_variation,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::fixtures;
    use crate::spectral::DEFAULT_PRECISION;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<u64> = (0..4)
            .map(|_| 0)
            .scan(rng_for(7, 0), |r, _| Some(r.next_u64()))
            .collect();
        let b: Vec<u64> = (0..4)
            .map(|_| 0)
            .scan(rng_for(7, 0), |r, _| Some(r.next_u64()))
            .collect();
        let c: Vec<u64> = (0..4)
            .map(|_| 0)
            .scan(rng_for(7, 1), |r, _| Some(r.next_u64()))
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn big_bounds_are_respected() {
        let mut rng = rng_for(1, 0);
        let bound = BigUint::from(3u32) << 70;
        for _ in 0..200 {
            assert!(random_below(&mut rng, &bound) < bound);
        }
    }

    #[test]
    fn mcsc_runs_follow_arcs_and_avoid_null_nodes() {
        let sys = fixtures::e1();
        let g = Graphs::new(&sys);
        let m = UniformMeasure::new(&sys, &g, DEFAULT_PRECISION).unwrap();
        let run = sample_mcsc(&g, &m, 0, 2000, 42);
        assert_eq!(run, sample_mcsc(&g, &m, 0, 2000, 42));
        assert_eq!(run.nodes.len(), 2000);
        for w in run.nodes.windows(2) {
            assert!(g.dsc.graph.has_arc(w[0], w[1]));
        }
        assert!(run.nodes.iter().all(|&i| g.positive[i]));
        assert!(sys.act(0, &run.trace).is_some());
        let nf = sys.monoid().normal_form(&run.trace);
        let cliques: Vec<Clique> = run.nodes.iter().map(|&i| g.dsc.nodes[i].clique).collect();
        assert_eq!(nf.cliques(), cliques.as_slice());
        assert!(sample_mcsc(&g, &m, 0, 0, 1).nodes.is_empty());
    }

    #[test]
    fn uniform_sampler_counts_and_support() {
        let sys = fixtures::e1();
        let g = Graphs::new(&sys);
        let s = UniformSampler::new(&g.adsc, 0, 2).unwrap();
        assert_eq!(s.count(), &BigUint::from(6u32));
        let mut rng = rng_for(3, 0);
        let mut seen: HashMap<String, usize> = HashMap::new();
        for _ in 0..600 {
            let w = s.sample(&mut rng);
            assert_eq!(w.len(), 2);
            assert!(sys.act(0, &w).is_some());
            let key = format!("{:?}", sys.monoid().normal_form(&w));
            *seen.entry(key).or_default() += 1;
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(sample_uniform_finite(&g, 0, 0, 9).unwrap(), Vec::<Letter>::new());
    }

    #[test]
    fn empty_set_error() {
        let m = crate::TraceMonoid::free(&["a"]).unwrap();
        let sys = ConcurrentSystem::new(m, &["s", "t"], &[("s", "a", "t")]).unwrap();
        let g = Graphs::new(&sys);
        assert!(UniformSampler::new(&g.adsc, 0, 1).is_ok());
        assert_eq!(UniformSampler::new(&g.adsc, 0, 2).unwrap_err(), Error::EmptySet(2));
    }

    #[test]
    fn length_one_first_cliques_are_letter_uniform() {
        let sys = fixtures::e1();
        let g = Graphs::new(&sys);
        let m = UniformMeasure::new(&sys, &g, DEFAULT_PRECISION).unwrap();
        let rep = empirical_first_clique(&sys, &g, &m, 0, 1, 3000, 5).unwrap();
        // a, b, d each near 1/3; ad and bd never.
        assert_eq!(rep.cliques, ["a", "b", "d", "ad", "bd"]);
        for k in 0..3 {
            assert!((rep.observed[k] - 1.0 / 3.0).abs() < 0.05);
        }
        assert_eq!(rep.observed[3], 0.0);
    }
}
