//! Möbius matrix, its determinant, the characteristic root, growth-matrix
//! evaluation, spectral radii and the restriction-root comparison.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{Digraph, PathCounter, StateCliqueGraph};
use crate::poly::{Poly, SturmChain};
use crate::system::{ConcurrentSystem, State};

/// Default width of root isolating intervals.
pub const DEFAULT_PRECISION: f64 = 1e-12;
/// Relative gap between Collatz–Wielandt bounds at which power iteration stops.
pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 100_000;
/// Components within this relative distance of the global radius are basic.
pub const BASIC_TOLERANCE: f64 = 1e-8;
/// Components at least this far from the global radius are not basic.
pub const NON_BASIC_THRESHOLD: f64 = 1e-6;

/// Square matrix of integer polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyMatrix {
    pub dim: usize,
    pub entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Poly::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Poly::one();
        }
        PolyMatrix { dim, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.dim + j]
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> PolyMatrix {
        let entries = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        PolyMatrix {
            dim: idx.len(),
            entries,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.entries.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    /// Coefficient matrix of `z^k`.
    pub fn coefficient(&self, k: usize) -> Vec<Vec<BigInt>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).coeff(k)).collect())
            .collect()
    }

    pub fn eval(&self, t: &BigRational) -> Vec<Vec<BigRational>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).eval(t)).collect())
            .collect()
    }

    pub fn eval_f64(&self, t: f64) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).eval_f64(t)).collect())
            .collect()
    }

    /// Fraction-free Bareiss elimination over `Z[z]`.
    pub fn determinant(&self) -> Poly {
        let n = self.dim;
        if n == 0 {
            return Poly::one();
        }
        let mut m: Vec<Vec<Poly>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut negate = false;
        let mut prev = Poly::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        negate = !negate;
                    }
                    None => return Poly::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                    m[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
                }
                m[i][k] = Poly::zero();
            }
            prev = m[k][k].clone();
        }
        let det = m[n - 1][n - 1].clone();
        if negate {
            -det
        } else {
            det
        }
    }
}

/// `μ_{α,β}(z) = Σ (−1)^{|c|} z^{|c|}` over cliques `c` (ε included) with
/// `α·c = β`.
pub fn mobius_matrix(sys: &ConcurrentSystem) -> PolyMatrix {
    let n = sys.num_states();
    let width = sys.monoid().cliques().iter().map(|c| c.len()).max().unwrap_or(0) + 1;
    let mut coeffs = vec![vec![0i64; width]; n * n];
    for a in 0..n {
        for c in sys.cliques_from(a) {
            let b = sys.act_clique(a, c).expect("enabled clique");
            coeffs[a * n + b][c.len()] += if c.len() % 2 == 0 { 1 } else { -1 };
        }
    }
    PolyMatrix {
        dim: n,
        entries: coeffs.iter().map(|c| Poly::from_i64s(c)).collect(),
    }
}

/// A real root isolated in `(lo, hi]`, or given exactly when `lo == hi`.
///
/// `square_free` has no other root in `(0, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicRoot {
    pub theta: Poly,
    pub square_free: Poly,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl CharacteristicRoot {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn approx(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    /// Shrinks the interval to width at most `width`, keeping the root.
    pub fn refine(&mut self, width: &BigRational) {
        let sturm = SturmChain::new(&self.square_free);
        let two = BigRational::from_integer(2.into());
        while !self.is_exact() && &self.width() > width {
            if self.square_free.sign_at(&self.hi) == 0 {
                self.lo = self.hi.clone();
                break;
            }
            let mid = (&self.lo + &self.hi) / &two;
            if self.square_free.sign_at(&mid) == 0 {
                self.lo = mid.clone();
                self.hi = mid;
            } else if sturm.count_roots(&self.lo, &mid) >= 1 {
                self.hi = mid;
            } else {
                self.lo = mid;
            }
        }
    }

    /// Exact test `t < r` for `t ≥ 0`.
    pub fn exceeds(&self, t: &BigRational) -> bool {
        below_smallest_root(&self.square_free, t)
    }
}

/// True when `p` has no root in `(0, t]`; `p(0) ≠ 0` is required.
fn below_smallest_root(p: &Poly, t: &BigRational) -> bool {
    if !t.is_positive() {
        return true;
    }
    if p.sign_at(t) == 0 {
        return false;
    }
    SturmChain::new(p).count_roots(&BigRational::zero(), t) == 0
}

pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float")
}

/// Smallest root of `p` in `(0, 1]`, isolated to `precision`. `p` must not
/// vanish at 0.
pub fn isolate_smallest_root(p: &Poly, precision: &BigRational) -> Option<CharacteristicRoot> {
    let sf = p.square_free_part();
    let sturm = SturmChain::new(&sf);
    let zero = BigRational::zero();
    let one = BigRational::one();
    if sf.degree().unwrap_or(0) == 0 || sturm.count_roots(&zero, &one) == 0 {
        return None;
    }
    let two = BigRational::from_integer(2.into());
    let (mut lo, mut hi) = (zero, one);
    // Invariant: no root in (0, lo], at least one in (lo, hi].
    loop {
        let count = sturm.count_roots(&lo, &hi);
        if count == 1 && sf.sign_at(&hi) == 0 {
            lo = hi.clone();
            break;
        }
        if count == 1 && &(&hi - &lo) <= precision {
            break;
        }
        let mid = (&lo + &hi) / &two;
        if sf.sign_at(&mid) == 0 {
            if sturm.count_roots(&lo, &mid) == 1 {
                lo = mid.clone();
                hi = mid;
                break;
            }
            hi = mid;
        } else if sturm.count_roots(&lo, &mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(CharacteristicRoot {
        theta: p.clone(),
        square_free: sf,
        lo,
        hi,
    })
}

/// Root of smallest modulus of `det μ` for a non-trivial accessible system.
pub fn characteristic_root(sys: &ConcurrentSystem, precision: f64) -> Result<CharacteristicRoot> {
    if sys.is_trivial() {
        return Err(Error::TrivialSystem);
    }
    if !sys.is_accessible() {
        return Err(Error::NotAccessible);
    }
    let theta = mobius_matrix(sys).determinant();
    isolate_smallest_root(&theta, &rational_from_f64(precision)).ok_or(Error::NoRootInUnitInterval)
}

/// Radius of convergence of the growth series of an arbitrary system:
/// finite, or infinite when executions are bounded in length.
#[derive(Clone, Debug, PartialEq)]
pub enum RootBound {
    Finite(CharacteristicRoot),
    Infinite,
}

impl RootBound {
    pub fn approx(&self) -> f64 {
        match self {
            RootBound::Finite(r) => r.approx(),
            RootBound::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<&CharacteristicRoot> {
        match self {
            RootBound::Finite(r) => Some(r),
            RootBound::Infinite => None,
        }
    }
}

/// Strongly connected components of the state graph, as state lists.
pub fn state_components(sys: &ConcurrentSystem) -> Vec<Vec<State>> {
    let mut g = Digraph::new(sys.num_states());
    for (s, _, t) in sys.state_edges() {
        g.add_arc(s, t);
    }
    g.condensation().members
}

/// `det μ` factors over the state components, since `μ` is block
/// triangular in the condensation order. The radius is the smallest root
/// in `(0, 1]` over all blocks.
pub fn general_root(sys: &ConcurrentSystem, precision: f64) -> RootBound {
    let mu = mobius_matrix(sys);
    let prec = rational_from_f64(precision);
    let mut best: Option<CharacteristicRoot> = None;
    for comp in state_components(sys) {
        let block = mu.submatrix(&comp).determinant();
        let Some(root) = isolate_smallest_root(&block, &prec) else {
            continue;
        };
        best = Some(match best {
            None => root,
            Some(b) => match compare_roots(&b, &root) {
                Ordering::Greater => root,
                _ => b,
            },
        });
    }
    match best {
        Some(mut r) => {
            r.theta = mu.determinant();
            RootBound::Finite(r)
        }
        None => RootBound::Infinite,
    }
}

/// Exact comparison of two isolated roots.
pub fn compare_roots(a: &CharacteristicRoot, b: &CharacteristicRoot) -> Ordering {
    if roots_equal(a, b) {
        return Ordering::Equal;
    }
    let (mut a, mut b) = (a.clone(), b.clone());
    loop {
        if a.hi < b.lo || (a.hi == b.lo && !b.is_exact()) {
            return Ordering::Less;
        }
        if b.hi < a.lo || (b.hi == a.lo && !a.is_exact()) {
            return Ordering::Greater;
        }
        if a.is_exact() && b.is_exact() {
            return a.lo.cmp(&b.lo);
        }
        let wa = a.width() / BigRational::from_integer(2.into());
        let wb = b.width() / BigRational::from_integer(2.into());
        a.refine(&wa);
        b.refine(&wb);
    }
}

pub fn compare_bounds(a: &RootBound, b: &RootBound) -> Ordering {
    match (a, b) {
        (RootBound::Infinite, RootBound::Infinite) => Ordering::Equal,
        (RootBound::Infinite, _) => Ordering::Greater,
        (_, RootBound::Infinite) => Ordering::Less,
        (RootBound::Finite(x), RootBound::Finite(y)) => compare_roots(x, y),
    }
}

/// Equal iff the common factor of both square-free parts has a root in the
/// intersection of the two isolating intervals.
fn roots_equal(a: &CharacteristicRoot, b: &CharacteristicRoot) -> bool {
    match (a.is_exact(), b.is_exact()) {
        (true, true) => a.lo == b.lo,
        (true, false) => contains_root(b, &a.lo),
        (false, true) => contains_root(a, &b.lo),
        (false, false) => {
            let lo = (&a.lo).max(&b.lo).clone();
            let hi = (&a.hi).min(&b.hi).clone();
            if lo >= hi {
                return false;
            }
            let g = a.square_free.gcd(&b.square_free);
            if g.degree().unwrap_or(0) == 0 {
                return false;
            }
            SturmChain::new(&g).count_roots(&lo, &hi) >= 1
        }
    }
}

fn contains_root(r: &CharacteristicRoot, x: &BigRational) -> bool {
    &r.lo < x && x <= &r.hi && r.square_free.sign_at(x) == 0
}

/// `G(t) = μ(t)⁻¹` in exact arithmetic, for `0 ≤ t` below every root of
/// `det μ` in `(0, t]`.
pub fn growth_eval(sys: &ConcurrentSystem, t: &BigRational) -> Result<Vec<Vec<BigRational>>> {
    if t.is_negative() {
        return Err(Error::SingularAtT(t.to_string()));
    }
    let mu = mobius_matrix(sys);
    let theta = mu.determinant().square_free_part();
    if !below_smallest_root(&theta, t) {
        return Err(Error::SingularAtT(t.to_string()));
    }
    invert(mu.eval(t)).ok_or_else(|| Error::SingularAtT(t.to_string()))
}

/// Gauss–Jordan inversion over the rationals.
pub fn invert(mut m: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        inv.swap(k, p);
        let pivot = m[k][k].clone();
        for j in 0..n {
            m[k][j] = &m[k][j] / &pivot;
            inv[k][j] = &inv[k][j] / &pivot;
        }
        for i in 0..n {
            if i == k || m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].clone();
            for j in 0..n {
                let (mkj, ikj) = (m[k][j].clone(), inv[k][j].clone());
                m[i][j] -= &f * mkj;
                inv[i][j] -= &f * ikj;
            }
        }
    }
    Some(inv)
}

/// Result of convolving execution counts with the Möbius coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct InversionReport {
    pub order: usize,
    /// `(n, α, β)` where `(μG)_n` or `(Gμ)_n` differs from `Id·δ_{n,0}`.
    pub failures: Vec<(usize, String, String)>,
    pub pass: bool,
}

/// `table[n][α][β] = #ℳ_{α,β}(n)` as signed integers.
pub fn growth_coefficients(sys: &ConcurrentSystem, adsc: &StateCliqueGraph, order: usize) -> Vec<Vec<Vec<BigInt>>> {
    PathCounter::new(adsc, sys.num_states())
        .table(order)
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect()
        })
        .collect()
}

/// Growth coefficients from `G_n = −Σ_{k≥1} μ_k G_{n−k}`, using only the
/// Möbius matrix.
pub fn growth_from_mobius(sys: &ConcurrentSystem, order: usize) -> Vec<Vec<Vec<BigInt>>> {
    let mu = mobius_matrix(sys);
    let d = sys.num_states();
    let deg = mu.max_degree();
    let mus: Vec<Vec<Vec<BigInt>>> = (0..=deg).map(|k| mu.coefficient(k)).collect();
    let mut g: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut cur = vec![vec![BigInt::zero(); d]; d];
        if n == 0 {
            for (i, row) in cur.iter_mut().enumerate() {
                row[i] = BigInt::one();
            }
        } else {
            for k in 1..=deg.min(n) {
                let prod = mat_mul(&mus[k], &g[n - k]);
                for i in 0..d {
                    for j in 0..d {
                        cur[i][j] -= &prod[i][j];
                    }
                }
            }
        }
        g.push(cur);
    }
    g
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

/// Checks `μ·G = G·μ = Id` coefficientwise up to `order`, with `G` from
/// path counting.
pub fn verify_inversion(sys: &ConcurrentSystem, adsc: &StateCliqueGraph, order: usize) -> InversionReport {
    let mu = mobius_matrix(sys);
    let d = sys.num_states();
    let g = growth_coefficients(sys, adsc, order);
    let deg = mu.max_degree();
    let mus: Vec<Vec<Vec<BigInt>>> = (0..=deg).map(|k| mu.coefficient(k)).collect();
    let mut failures = Vec::new();
    for n in 0..=order {
        let mut left = vec![vec![BigInt::zero(); d]; d];
        let mut right = vec![vec![BigInt::zero(); d]; d];
        for k in 0..=deg.min(n) {
            let l = mat_mul(&mus[k], &g[n - k]);
            let r = mat_mul(&g[n - k], &mus[k]);
            for i in 0..d {
                for j in 0..d {
                    left[i][j] += &l[i][j];
                    right[i][j] += &r[i][j];
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                let expected = if n == 0 && i == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                };
                if left[i][j] != expected || right[i][j] != expected {
                    failures.push((n, sys.state_name(i).to_string(), sys.state_name(j).to_string()));
                }
            }
        }
    }
    InversionReport {
        order,
        pass: failures.is_empty(),
        failures,
    }
}

/// Power iteration on `F + Id` of one strongly connected block, from the
/// all-ones vector, until the Collatz–Wielandt bounds meet.
fn block_radius(g: &Digraph, tol: f64) -> Result<f64> {
    let n = g.len();
    let mut x = vec![1.0f64; n];
    for _ in 0..POWER_MAX_ITERATIONS {
        let mut y = x.clone();
        for (u, v) in g.arcs() {
            y[u] += x[v];
        }
        let ratios = y.iter().zip(&x).map(|(a, b)| a / b);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r), h.max(r)));
        if hi - lo <= tol * hi {
            return Ok((lo + hi) / 2.0 - 1.0);
        }
        let m = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / m).collect();
    }
    Err(Error::NonConvergence(POWER_MAX_ITERATIONS))
}

/// Per-component radii and the basic flags of a digraph.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentRadii {
    pub radius: f64,
    /// Per condensation component; 0 for components without a cycle.
    pub radii: Vec<f64>,
    pub basic: Vec<bool>,
}

pub fn component_radii(g: &Digraph, tol: f64) -> Result<ComponentRadii> {
    let cond = g.condensation();
    let mut radii = Vec::with_capacity(cond.len());
    for (k, members) in cond.members.iter().enumerate() {
        if !cond.cyclic[k] {
            radii.push(0.0);
            continue;
        }
        let keep: Vec<bool> = (0..g.len()).map(|v| cond.component[v] == k).collect();
        let (block, _) = g.induced(&keep);
        debug_assert_eq!(block.len(), members.len());
        radii.push(block_radius(&block, tol)?);
    }
    let radius = radii.iter().cloned().fold(0.0, f64::max);
    let mut basic = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        if radius == 0.0 {
            basic.push(true);
            continue;
        }
        let rel = (radius - r).abs() / radius;
        if rel <= BASIC_TOLERANCE {
            basic.push(true);
        } else if rel >= NON_BASIC_THRESHOLD {
            basic.push(false);
        } else {
            return Err(Error::AmbiguousBasic {
                component: k,
                radius: r,
                global: radius,
            });
        }
    }
    Ok(ComponentRadii { radius, radii, basic })
}

/// Spectral radius of the adjacency matrix: the largest radius over
/// strongly connected blocks, 0 for acyclic graphs.
pub fn spectral_radius(g: &Digraph, tol: f64) -> Result<f64> {
    let cond = g.condensation();
    let mut best = 0.0f64;
    for k in 0..cond.len() {
        if cond.cyclic[k] {
            let keep: Vec<bool> = (0..g.len()).map(|v| cond.component[v] == k).collect();
            best = best.max(block_radius(&g.induced(&keep).0, tol)?);
        }
    }
    Ok(best)
}

/// Root of the system restricted to `Σ ∖ {a}` against the full root.
#[derive(Clone, Debug)]
pub struct RestrictionRoot {
    pub letter: String,
    pub root: RootBound,
    /// Exact comparison of the restricted root with the full root.
    pub ordering: Ordering,
}

#[derive(Clone, Debug)]
pub struct SpectralPropertyReport {
    pub root: CharacteristicRoot,
    pub letters: Vec<RestrictionRoot>,
    /// Every restricted root strictly exceeds the full root.
    pub holds: bool,
    /// Letters whose restricted root does not exceed the full root.
    pub witnesses: Vec<String>,
}

pub fn spectral_property_report(sys: &ConcurrentSystem, precision: f64) -> Result<SpectralPropertyReport> {
    let root = characteristic_root(sys, precision)?;
    let full = RootBound::Finite(root.clone());
    let mut letters = Vec::with_capacity(sys.monoid().len());
    for a in sys.monoid().letters() {
        let r = general_root(&sys.restrict(a), precision);
        let ordering = compare_bounds(&r, &full);
        letters.push(RestrictionRoot {
            letter: sys.monoid().name(a).to_string(),
            root: r,
            ordering,
        });
    }
    let witnesses: Vec<String> = letters
        .iter()
        .filter(|l| l.ordering != Ordering::Greater)
        .map(|l| l.letter.clone())
        .collect();
    Ok(SpectralPropertyReport {
        root,
        holds: witnesses.is_empty(),
        letters,
        witnesses,
    })
}
