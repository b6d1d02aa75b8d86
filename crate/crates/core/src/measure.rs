//! The uniform measure of an irreducible system: Parry cocycle, fibred
//! valuation `f`, its Möbius transform `h`, the `g` table and the Markov
//! chain of states-and-cliques.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{Graphs, StateCliqueGraph};
use crate::monoid::{Clique, Letter};
use crate::spectral::{
    characteristic_root, component_radii, growth_eval, mobius_matrix, rational_from_f64, CharacteristicRoot,
    PolyMatrix, POWER_TOLERANCE,
};
use crate::system::{ConcurrentSystem, State};

/// Relative pivot threshold when computing the kernel of `μ(r)`.
pub const KERNEL_PIVOT: f64 = 1e-9;
/// `h` values at or below this are zero.
pub const ZERO_THRESHOLD: f64 = 1e-6;
/// Tolerance of the measure identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Agreement required between the kernel cocycle and growth-series ratios.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-3;
/// Bound on `‖F⁺u − u/r‖∞`.
pub const EIGEN_TOLERANCE: f64 = 1e-6;

/// Kernel of a real matrix, with pivots relative to its largest entry.
pub fn kernel(m: &[Vec<f64>]) -> (usize, Option<Vec<f64>>) {
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
    kernel_with_scale(m, scale)
}

/// Kernel of `μ(t)`. Pivots are measured against the largest
/// `Σ_k |μ_k| t^k`, the size of the terms cancelling in each entry.
pub fn mobius_kernel(mu: &PolyMatrix, t: f64) -> (usize, Option<Vec<f64>>) {
    let scale = mu
        .entries
        .iter()
        .map(|p| {
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c.to_f64().unwrap_or(f64::INFINITY).abs() * t.powi(k as i32))
                .sum::<f64>()
        })
        .fold(0.0f64, f64::max);
    kernel_with_scale(&mu.eval_f64(t), scale)
}

/// Gaussian elimination with full pivoting; pivots at or below
/// `KERNEL_PIVOT · scale` count as zero. Returns the kernel dimension and,
/// when it is 1, a spanning vector.
pub fn kernel_with_scale(m: &[Vec<f64>], scale: f64) -> (usize, Option<Vec<f64>>) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let tau = KERNEL_PIVOT * scale;
    let mut cols: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for k in 0..n {
        let mut best = (k, k, 0.0f64);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                if x.abs() > best.2 {
                    best = (i, j, x.abs());
                }
            }
        }
        if best.2 <= tau {
            break;
        }
        a.swap(k, best.0);
        for row in a.iter_mut() {
            row.swap(k, best.1);
        }
        cols.swap(k, best.1);
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot = &top[k];
        for row in bottom {
            let factor = row[k] / pivot[k];
            for (x, p) in row[k..].iter_mut().zip(&pivot[k..]) {
                *x -= factor * p;
            }
        }
        rank += 1;
    }
    let dim = n - rank;
    if dim != 1 {
        return (dim, None);
    }
    let mut y = vec![0.0; n];
    y[n - 1] = 1.0;
    for k in (0..rank).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * y[j]).sum();
        y[k] = -s / a[k][k];
    }
    let mut u = vec![0.0; n];
    for (j, &c) in cols.iter().enumerate() {
        u[c] = y[j];
    }
    (1, Some(u))
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckEntry {
    pub from: String,
    pub to: String,
    pub kernel: f64,
    pub series: f64,
}

/// `Γ(α,β) = u_β / u_α` with `u` spanning `ker μ(r)` and `u_base = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct Cocycle {
    pub kernel_dim: usize,
    pub u: Vec<f64>,
    /// Rational point below `r` where growth ratios were compared.
    pub t: f64,
    pub cross_check: Vec<CrossCheckEntry>,
}

impl Cocycle {
    pub fn gamma(&self, a: State, b: State) -> f64 {
        self.u[b] / self.u[a]
    }
}

pub fn parry_cocycle(sys: &ConcurrentSystem, root: &CharacteristicRoot) -> Result<Cocycle> {
    let (dim, vec) = mobius_kernel(&mobius_matrix(sys), root.approx());
    let Some(mut u) = vec else {
        return Err(Error::KernelDimensionNotOne(dim));
    };
    let base = u[sys.base()];
    if base == 0.0 {
        return Err(Error::NonPositiveKernelVector);
    }
    for x in &mut u {
        *x /= base;
    }
    if u.iter().any(|&x| x <= 0.0) {
        return Err(Error::NonPositiveKernelVector);
    }

    let mut t = rational_from_f64(root.approx() * (1.0 - 1e-6));
    if !root.exceeds(&t) {
        t = root.lo.clone() * rational_from_f64(1.0 - 1e-6);
    }
    let g = growth_eval(sys, &t)?;
    let totals: Vec<f64> = g
        .iter()
        .map(|row| {
            row.iter()
                .fold(BigRational::zero(), |s, x| s + x)
                .to_f64()
                .unwrap_or(f64::NAN)
        })
        .collect();
    let mut cross_check = Vec::new();
    let n = sys.num_states();
    for a in 0..n {
        for b in 0..n {
            let kernel = u[b] / u[a];
            let series = totals[b] / totals[a];
            let entry = CrossCheckEntry {
                from: sys.state_name(a).to_string(),
                to: sys.state_name(b).to_string(),
                kernel,
                series,
            };
            if (kernel - series).abs() > CROSS_CHECK_TOLERANCE * kernel.max(1.0) {
                return Err(Error::CrossCheckFailure {
                    from: entry.from,
                    to: entry.to,
                    kernel,
                    series,
                });
            }
            cross_check.push(entry);
        }
    }
    Ok(Cocycle {
        kernel_dim: 1,
        u,
        t: t.to_f64().unwrap_or(f64::NAN),
        cross_check,
    })
}

/// `f_α(c) = r^{|c|} Γ(α, α·c)`, or 0 when `α·c = ⊥`; indexed by state then
/// by position in the canonical clique list.
pub fn fibred_valuation(sys: &ConcurrentSystem, r: f64, cocycle: &Cocycle) -> Vec<Vec<f64>> {
    (0..sys.num_states())
        .map(|a| {
            sys.monoid()
                .cliques()
                .iter()
                .map(|&c| match sys.act_clique(a, c) {
                    Some(b) => r.powi(c.len() as i32) * cocycle.gamma(a, b),
                    None => 0.0,
                })
                .collect()
        })
        .collect()
}

/// `h_α(c) = Σ_{c′ ⊇ c} (−1)^{|c′|−|c|} f_α(c′)`.
pub fn mobius_transform(sys: &ConcurrentSystem, f: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cliques = sys.monoid().cliques();
    f.iter()
        .map(|fa| {
            cliques
                .iter()
                .map(|&c| {
                    cliques
                        .iter()
                        .zip(fa)
                        .filter(|(&d, _)| c.is_subset(d))
                        .map(|(&d, &v)| if (d.len() - c.len()) % 2 == 0 { v } else { -v })
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn clique_pos(sys: &ConcurrentSystem, c: Clique) -> usize {
    sys.monoid().clique_index(c).expect("clique of the monoid")
}

/// `g_α(c) = Σ_{d ∈ 𝔠_β, c → d} h_β(d)` with `β = α·c`, per DSC node.
pub fn g_table(sys: &ConcurrentSystem, dsc: &StateCliqueGraph, h: &[Vec<f64>]) -> Vec<f64> {
    dsc.nodes
        .iter()
        .map(|n| {
            sys.enabled_cliques(n.target)
                .into_iter()
                .filter(|&d| sys.monoid().is_normal_pair(n.clique, d))
                .map(|d| h[n.target][clique_pos(sys, d)])
                .sum()
        })
        .collect()
}

/// Initial laws and transition matrix of the Markov chain of
/// states-and-cliques.
#[derive(Clone, Debug, Serialize)]
pub struct Mcsc {
    /// Per state, `(DSC node, probability)` over `𝔠_α`.
    pub initial: Vec<Vec<(usize, f64)>>,
    /// Square over DSC nodes.
    pub transition: Vec<Vec<f64>>,
    /// Rows with `g ≤` [`ZERO_THRESHOLD`]; never entered by the chain and
    /// left unnormalized.
    pub unreachable: Vec<bool>,
}

pub fn mcsc(sys: &ConcurrentSystem, dsc: &StateCliqueGraph, h: &[Vec<f64>], g: &[f64]) -> Mcsc {
    let n = dsc.len();
    let initial = (0..sys.num_states())
        .map(|a| {
            (0..n)
                .filter(|&i| dsc.nodes[i].state == a)
                .map(|i| (i, h[a][clique_pos(sys, dsc.nodes[i].clique)]))
                .collect()
        })
        .collect();
    let mut transition = vec![vec![0.0; n]; n];
    let mut unreachable = vec![false; n];
    for i in 0..n {
        let flagged = g[i] <= ZERO_THRESHOLD;
        unreachable[i] = flagged;
        for &j in dsc.graph.successors(i) {
            let d = &dsc.nodes[j];
            let w = h[d.state][clique_pos(sys, d.clique)];
            transition[i][j] = if flagged { w } else { w / g[i] };
        }
    }
    Mcsc {
        initial,
        transition,
        unreachable,
    }
}

#[derive(Clone, Debug)]
pub struct UniformMeasure {
    pub root: CharacteristicRoot,
    pub r: f64,
    pub cocycle: Cocycle,
    pub cliques: Vec<Clique>,
    pub f: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    /// Per DSC node.
    pub g: Vec<f64>,
    pub chain: Mcsc,
}

impl UniformMeasure {
    /// Builds the measure of an irreducible system.
    pub fn new(sys: &ConcurrentSystem, graphs: &Graphs, precision: f64) -> Result<Self> {
        if !sys.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let root = characteristic_root(sys, precision)?;
        let r = root.approx();
        let cocycle = parry_cocycle(sys, &root)?;
        let f = fibred_valuation(sys, r, &cocycle);
        let h = mobius_transform(sys, &f);
        let g = g_table(sys, &graphs.dsc, &h);
        let chain = mcsc(sys, &graphs.dsc, &h, &g);
        Ok(UniformMeasure {
            root,
            r,
            cocycle,
            cliques: sys.monoid().cliques().to_vec(),
            f,
            h,
            g,
            chain,
        })
    }

    fn pos(&self, c: Clique) -> usize {
        self.cliques.binary_search(&c).expect("clique of the monoid")
    }

    pub fn gamma(&self, a: State, b: State) -> f64 {
        self.cocycle.gamma(a, b)
    }

    pub fn f(&self, a: State, c: Clique) -> f64 {
        self.f[a][self.pos(c)]
    }

    pub fn h(&self, a: State, c: Clique) -> f64 {
        self.h[a][self.pos(c)]
    }

    /// `r^{|x|} Γ(α, α·x)`, or 0 when `x` is not an execution from `α`.
    pub fn valuation(&self, sys: &ConcurrentSystem, a: State, word: &[Letter]) -> f64 {
        match sys.act(a, word) {
            Some(b) => self.r.powi(word.len() as i32) * self.gamma(a, b),
            None => 0.0,
        }
    }

    /// Violated measure identities, as messages; empty when all hold.
    pub fn check_identities(&self, sys: &ConcurrentSystem, dsc: &StateCliqueGraph) -> Vec<String> {
        let tol = IDENTITY_TOLERANCE;
        let n = sys.num_states();
        let mut out = Vec::new();
        for a in 0..n {
            if (self.gamma(a, a) - 1.0).abs() > tol {
                out.push(format!("Γ({0},{0}) ≠ 1", sys.state_name(a)));
            }
            for b in 0..n {
                for c in 0..n {
                    let lhs = self.gamma(a, c);
                    let rhs = self.gamma(a, b) * self.gamma(b, c);
                    if (lhs - rhs).abs() > tol * lhs.abs().max(1.0) {
                        out.push(format!(
                            "cocycle identity fails on ({},{},{})",
                            sys.state_name(a),
                            sys.state_name(b),
                            sys.state_name(c)
                        ));
                    }
                }
            }
            if self.h(a, Clique::EMPTY).abs() > tol {
                out.push(format!("h_{}(ε) = {}", sys.state_name(a), self.h(a, Clique::EMPTY)));
            }
            if let Some((k, v)) = self.h[a].iter().enumerate().find(|(_, &v)| v < -tol) {
                out.push(format!(
                    "h_{}({}) = {v} is negative",
                    sys.state_name(a),
                    sys.monoid().clique_name(self.cliques[k])
                ));
            }
            let enabled = sys.enabled_cliques(a);
            if !enabled.is_empty() {
                let total: f64 = enabled.iter().map(|&c| self.h(a, c)).sum();
                if (total - 1.0).abs() > tol {
                    out.push(format!("Σ h_{} = {total}", sys.state_name(a)));
                }
            }
        }
        for (i, node) in dsc.nodes.iter().enumerate() {
            let (h, fg) = (
                self.h(node.state, node.clique),
                self.f(node.state, node.clique) * self.g[i],
            );
            if (h - fg).abs() > tol {
                out.push(format!("h ≠ f·g at {}", dsc.node_name(sys, i)));
            }
            if !self.chain.unreachable[i] {
                let s: f64 = self.chain.transition[i].iter().sum();
                if (s - 1.0).abs() > tol {
                    out.push(format!("row {} sums to {s}", dsc.node_name(sys, i)));
                }
            }
        }
        out
    }
}

/// Nodes classified null by `h ≤` [`ZERO_THRESHOLD`] must be exactly the
/// graph-null nodes.
pub fn numeric_null_check(sys: &ConcurrentSystem, measure: &UniformMeasure, graphs: &Graphs) -> Result<Vec<usize>> {
    let mut mismatched = Vec::new();
    let mut null = Vec::new();
    for (i, n) in graphs.dsc.nodes.iter().enumerate() {
        let h = measure.h(n.state, n.clique);
        let numeric_positive = h > ZERO_THRESHOLD;
        if !numeric_positive {
            null.push(i);
        }
        if numeric_positive != graphs.positive[i] || (!numeric_positive && h.abs() > ZERO_THRESHOLD) {
            mismatched.push(graphs.dsc.node_name(sys, i));
        }
    }
    if mismatched.is_empty() {
        Ok(null)
    } else {
        Err(Error::ClassificationMismatch(mismatched))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub kernel_dim: usize,
    pub eigen_residual: f64,
    pub basic_components: Vec<Vec<String>>,
    pub terminal_components: Vec<Vec<String>>,
    pub basic_equals_terminal: bool,
    /// Every null node's component is reached from a basic component by a
    /// non-empty path of components, and no positive node's component is.
    pub null_reached_strictly: bool,
    /// The same statement with reachability taken reflexively.
    pub null_reached_literally: bool,
    pub pass: bool,
}

/// Kernel dimension of `μ(r)`, the eigenvector equation `F⁺u = u/r` on the
/// positive ADSC, basic versus terminal components, and reachability of
/// null nodes from basic components.
pub fn uniqueness_diagnostics(
    sys: &ConcurrentSystem,
    measure: &UniformMeasure,
    graphs: &Graphs,
) -> Result<UniquenessReport> {
    let (kernel_dim, _) = mobius_kernel(&mobius_matrix(sys), measure.r);

    let (plus, _) = graphs.adsc_plus();
    let u: Vec<f64> = plus
        .nodes
        .iter()
        .map(|n| measure.gamma(sys.base(), n.state) * measure.h(n.state, n.clique) / measure.r.powi(n.pos as i32 - 1))
        .collect();
    let mut eigen_residual = 0.0f64;
    for (i, &ui) in u.iter().enumerate() {
        let fu: f64 = plus.graph.successors(i).iter().map(|&j| u[j]).sum();
        eigen_residual = eigen_residual.max((fu - ui / measure.r).abs());
    }

    let cond = plus.condensation();
    let radii = component_radii(&plus.graph, POWER_TOLERANCE)?;
    let names = |k: usize| -> Vec<String> { cond.members[k].iter().map(|&i| plus.node_name(sys, i)).collect() };
    let basic_components: Vec<Vec<String>> = (0..cond.len()).filter(|&k| radii.basic[k]).map(names).collect();
    let terminal_components: Vec<Vec<String>> = cond.terminal_components().into_iter().map(names).collect();
    let basic_equals_terminal = radii.basic == cond.terminal;

    let full = graphs.adsc.condensation();
    let full_radii = component_radii(&graphs.adsc.graph, POWER_TOLERANCE)?;
    let basic: Vec<usize> = (0..full.len()).filter(|&k| full_radii.basic[k]).collect();
    let literal = full.dag.reachable(basic.iter().copied());
    let strict = full
        .dag
        .reachable(basic.iter().flat_map(|&k| full.dag.successors(k).iter().copied()));
    let mut null_reached_strictly = true;
    let mut null_reached_literally = true;
    for (i, node) in graphs.adsc.nodes.iter().enumerate() {
        if node.pos != 1 {
            continue;
        }
        let k = full.component[i];
        let positive = graphs.positive[node.dsc];
        null_reached_strictly &= strict[k] != positive;
        null_reached_literally &= literal[k] != positive;
    }

    let pass = kernel_dim == 1 && eigen_residual <= EIGEN_TOLERANCE && basic_equals_terminal && null_reached_strictly;
    Ok(UniquenessReport {
        kernel_dim,
        eigen_residual,
        basic_components,
        terminal_components,
        basic_equals_terminal,
        null_reached_strictly,
        null_reached_literally,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spectral::DEFAULT_PRECISION;

    fn build(sys: &ConcurrentSystem) -> (Graphs, UniformMeasure) {
        let g = Graphs::new(sys);
        let m = UniformMeasure::new(sys, &g, DEFAULT_PRECISION).unwrap();
        (g, m)
    }

    fn clique(sys: &ConcurrentSystem, s: &str) -> Clique {
        sys.monoid()
            .parse_word(s)
            .unwrap()
            .into_iter()
            .fold(Clique::EMPTY, Clique::with)
    }

    #[test]
    fn kernel_of_small_matrices() {
        let (d, u) = kernel(&[vec![0.25, -0.25], vec![-0.5, 0.5]]);
        assert_eq!(d, 1);
        let u = u.unwrap();
        assert!((u[0] - u[1]).abs() < 1e-12);
        assert_eq!(kernel(&[vec![1.0, 0.0], vec![0.0, 1.0]]).0, 0);
        assert_eq!(kernel(&[vec![0.0, 0.0], vec![0.0, 0.0]]).0, 2);
    }

    #[test]
    fn e1_tables() {
        let sys = fixtures::e1();
        let (g, m) = build(&sys);
        assert!((m.gamma(0, 1) - 1.0).abs() < 1e-9);
        let h = |s, c| m.h(s, clique(&sys, c));
        for (s, c, v) in [
            (0, "a", 0.25),
            (0, "b", 0.25),
            (0, "d", 0.0),
            (0, "ad", 0.25),
            (0, "bd", 0.25),
            (1, "c", 0.5),
            (1, "d", 0.5),
        ] {
            assert!((h(s, c) - v).abs() < 1e-9, "h_{s}({c})");
        }
        assert!((m.f(0, clique(&sys, "ad")) - 0.25).abs() < 1e-12);
        assert_eq!(m.f(1, clique(&sys, "a")), 0.0);
        assert_eq!(m.f(0, Clique::EMPTY), 1.0);
        let ga = g.dsc.find(0, clique(&sys, "a")).unwrap();
        assert!((m.g[ga] - 0.5).abs() < 1e-9);
        let gd = g.dsc.find(0, clique(&sys, "d")).unwrap();
        assert!(m.g[gd].abs() < 1e-9);
        assert!(m.chain.unreachable[gd]);
        assert!(m.check_identities(&sys, &g.dsc).is_empty());
        assert_eq!(numeric_null_check(&sys, &m, &g).unwrap(), [gd]);
    }

    #[test]
    fn aztec_tables() {
        let sys = fixtures::aztec();
        let (g, m) = build(&sys);
        let r = m.r;
        let st = |n| sys.state(n).unwrap();
        assert!((m.gamma(st("0"), st("1")) - 1.0 / r).abs() < 1e-6);
        assert!((m.gamma(st("3"), st("0")) - r * r).abs() < 1e-6);
        assert!((m.gamma(st("1"), st("2")) - 1.0).abs() < 1e-6);
        assert!(m.h(st("1"), clique(&sys, "a")).abs() < 1e-9);
        assert!((m.h(st("1"), clique(&sys, "b")) - (1.0 - r * r)).abs() < 1e-9);
        assert!((m.h(st("1"), clique(&sys, "ab")) - r * r).abs() < 1e-9);
        assert!(m.check_identities(&sys, &g.dsc).is_empty());
        assert_eq!(numeric_null_check(&sys, &m, &g).unwrap().len(), 8);
    }

    #[test]
    fn chain_condition_on_words() {
        let sys = fixtures::aztec();
        let (_, m) = build(&sys);
        let x = sys.monoid().parse_word("abc").unwrap();
        let y = sys.monoid().parse_word("ed").unwrap();
        let xy: Vec<Letter> = x.iter().chain(&y).copied().collect();
        let mid = sys.act(0, &x).unwrap();
        let lhs = m.valuation(&sys, 0, &xy);
        let rhs = m.valuation(&sys, 0, &x) * m.valuation(&sys, mid, &y);
        assert!(lhs > 0.0 && (lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn reducible_system_is_refused() {
        let sys = fixtures::tm2();
        let g = Graphs::new(&sys);
        assert!(matches!(
            UniformMeasure::new(&sys, &g, 1e-12),
            Err(Error::NotIrreducible)
        ));
    }

    #[test]
    fn uniqueness_on_fixtures() {
        for sys in [fixtures::e1(), fixtures::tm1(), fixtures::aztec(), fixtures::twelve()] {
            let (g, m) = build(&sys);
            let rep = uniqueness_diagnostics(&sys, &m, &g).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
}
