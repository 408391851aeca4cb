//! Exact evolution of the walk's law through intersection-size lumps.
//!
//! For a start vertex `X_0`, the stabilizer of `X_0` in the symmetric group
//! acts transitively on each class `{A : |A ∩ X_0| = j}`, and it commutes
//! with the walk. The law of `X_t` is therefore uniform within each class, so
//! the total-variation distance of `X_t` to the uniform law equals the
//! distance of the lumped law of `j_t = |X_t ∩ X_0|` to its stationary lump.
//! By vertex-transitivity this is `d(t)` for every start.
//!
//! The same orbit argument applied to the reference set `{1..n}` (disjoint
//! from `X_0 = {n+1..2n}`) makes `f_t = |X_t ∩ {1..n}|` a Markov chain too;
//! its moments drive the distinguishing-statistic lower bound.
//!
//! One step from a vertex `A` picks a uniform `n`-subset of the complement
//! of `A` (size `n+k`). If `|A ∩ R| = j` for a reference `n`-set `R`, the
//! complement holds `n - j` elements of `R`, so the next overlap is
//! `H(n+k, n-j, n)`. Rows therefore have at most `min(k, n-j) + 1` nonzero
//! entries and one step costs `O(n · min(n, k))`.

use alloc::borrow::Cow;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent f64 math when std is linked
use num_traits::Float;
use num_traits::Zero;

use crate::combinatorics::{compensated_sum, CompensatedSum, ExactRational, HypergeometricParams, LogFactorials};
use crate::model::{stationary_lump, stationary_lump_exact, KneserParams, LumpSpec};

/// Distribution entries below this are flushed to zero after each step.
pub const FLUSH_THRESHOLD: f64 = 1e-320;

/// Largest total flushed mass a profile may accumulate.
pub const FLUSH_BUDGET: f64 = 1e-14;

/// Dense kernels with more stored entries than this need row streaming.
pub const DENSE_ENTRY_LIMIT: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("flushed probability mass {flushed:e} exceeds budget {FLUSH_BUDGET:e}")]
    FlushBudgetExceeded { flushed: f64 },
}

/// Probability vector over lump states `0..=n`.
///
/// Never renormalized after construction; mass drift is observable through
/// [`LumpedDistribution::total_mass`].
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedDistribution {
    masses: Vec<f64>,
    time_step: u64,
    flushed: f64,
}

impl LumpedDistribution {
    pub fn from_masses(masses: Vec<f64>, time_step: u64) -> Self {
        Self {
            masses,
            time_step,
            flushed: 0.0,
        }
    }

    /// Point mass at `state` over `len` states, at time zero.
    pub fn delta(len: usize, state: usize) -> Self {
        let mut masses = alloc::vec![0.0; len];
        masses[state] = 1.0;
        Self::from_masses(masses, 0)
    }

    /// The lump's initial law for `spec`.
    pub fn initial(p: KneserParams, spec: LumpSpec) -> Self {
        Self::delta(p.n() as usize + 1, spec.initial_state(p))
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn time_step(&self) -> u64 {
        self.time_step
    }

    /// Total mass flushed to zero so far.
    pub fn flushed_mass(&self) -> f64 {
        self.flushed
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.masses.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.masses.iter().enumerate().map(|(s, m)| s as f64 * m))
    }

    /// Central second moment, summed as `Σ (s - mean)^2 μ(s)`.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        compensated_sum(self.masses.iter().enumerate().map(|(s, m)| {
            let d = s as f64 - mean;
            d * d * m
        }))
        .max(0.0)
    }

    pub fn moments(&self) -> MomentTrack {
        MomentTrack {
            time: self.time_step,
            mean: self.mean(),
            variance: self.variance(),
        }
    }

    /// Half the ℓ¹ distance to `other`.
    pub fn tv_distance(&self, other: &LumpedDistribution) -> f64 {
        assert_eq!(self.masses.len(), other.masses.len(), "state spaces differ");
        0.5 * compensated_sum(self.masses.iter().zip(&other.masses).map(|(a, b)| (a - b).abs()))
    }
}

/// Mean and variance of `f_t` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTrack {
    pub time: u64,
    pub mean: f64,
    pub variance: f64,
}

/// Nonzero band of one kernel row: `probs[i]` is the probability of moving
/// to state `first + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub first: usize,
    pub probs: Vec<f64>,
}

impl KernelRow {
    /// Inclusive target range.
    pub fn support(&self) -> (usize, usize) {
        (self.first, self.first + self.probs.len() - 1)
    }

    pub fn prob(&self, to: usize) -> f64 {
        to.checked_sub(self.first)
            .and_then(|i| self.probs.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelStorage {
    /// All rows precomputed once.
    Dense,
    /// Rows recomputed on every use; memory `O(n + k)`.
    Streaming,
}

#[derive(Debug, Clone)]
enum Rows {
    Dense(Vec<KernelRow>),
    Streaming,
}

/// Transition kernel of a lumped chain over `0..=n`.
#[derive(Debug, Clone)]
pub struct LumpedKernel {
    params: KneserParams,
    spec: LumpSpec,
    factorials: LogFactorials,
    rows: Rows,
}

/// Law of the row-`from` hypergeometric draw and whether the target state
/// is `n - Y` (reference overlap) rather than `Y` (start overlap).
fn row_law(p: KneserParams, spec: LumpSpec, from: usize) -> (HypergeometricParams, bool) {
    let (n, k) = (p.n() as u64, p.k() as u64);
    let from = from as u64;
    match spec {
        LumpSpec::StartOverlap => (
            HypergeometricParams::new(n + k, n - from, n).expect("n - j <= n + k"),
            false,
        ),
        LumpSpec::ReferenceOverlap => (
            HypergeometricParams::new(n + k, from + k, n).expect("s + k <= n + k"),
            true,
        ),
    }
}

fn compute_row(p: KneserParams, spec: LumpSpec, table: &LogFactorials, from: usize) -> KernelRow {
    let (law, reflect) = row_law(p, spec, from);
    let (lo, hi) = law.support();
    let mut probs = law.pmf_vec(table);
    if reflect {
        probs.reverse();
        KernelRow {
            first: (p.n() as u64 - hi) as usize,
            probs,
        }
    } else {
        KernelRow {
            first: lo as usize,
            probs,
        }
    }
}

/// Stored entries of a dense kernel: `Σ_j (min(k, n - j) + 1)`.
pub fn kernel_entry_count(p: KneserParams) -> u64 {
    let (n, k) = (p.n() as u64, p.k() as u64);
    (0..=n).map(|j| k.min(n - j) + 1).sum()
}

/// Whether a dense kernel for `p` fits under [`DENSE_ENTRY_LIMIT`].
pub fn dense_kernel_feasible(p: KneserParams) -> bool {
    kernel_entry_count(p) <= DENSE_ENTRY_LIMIT
}

/// Dense kernel for `spec`.
pub fn build_kernel(p: KneserParams, spec: LumpSpec) -> LumpedKernel {
    build_kernel_with(p, spec, KernelStorage::Dense)
}

pub fn build_kernel_with(p: KneserParams, spec: LumpSpec, storage: KernelStorage) -> LumpedKernel {
    let factorials = LogFactorials::new(p.n() as u64 + p.k() as u64);
    let rows = match storage {
        KernelStorage::Dense => Rows::Dense(
            (0..=p.n() as usize)
                .map(|j| compute_row(p, spec, &factorials, j))
                .collect(),
        ),
        KernelStorage::Streaming => Rows::Streaming,
    };
    LumpedKernel {
        params: p,
        spec,
        factorials,
        rows,
    }
}

/// Reusable accumulators for [`LumpedKernel::advance`].
#[derive(Debug, Clone, Default)]
pub struct StepScratch {
    sums: Vec<CompensatedSum>,
    out: Vec<f64>,
}

impl LumpedKernel {
    pub fn params(&self) -> KneserParams {
        self.params
    }

    pub fn spec(&self) -> LumpSpec {
        self.spec
    }

    pub fn storage(&self) -> KernelStorage {
        match self.rows {
            Rows::Dense(_) => KernelStorage::Dense,
            Rows::Streaming => KernelStorage::Streaming,
        }
    }

    pub fn states(&self) -> usize {
        self.params.n() as usize + 1
    }

    pub fn row(&self, from: usize) -> Cow<'_, KernelRow> {
        match &self.rows {
            Rows::Dense(rows) => Cow::Borrowed(&rows[from]),
            Rows::Streaming => Cow::Owned(compute_row(self.params, self.spec, &self.factorials, from)),
        }
    }

    /// One step of `dist` in place.
    pub fn advance(&self, dist: &mut LumpedDistribution, scratch: &mut StepScratch) {
        let len = self.states();
        assert_eq!(dist.masses.len(), len, "distribution over wrong state space");
        scratch.sums.clear();
        scratch.sums.resize(len, CompensatedSum::new());
        for (from, &mass) in dist.masses.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let row = self.row(from);
            for (i, &prob) in row.probs.iter().enumerate() {
                scratch.sums[row.first + i].add(mass * prob);
            }
        }
        scratch.out.clear();
        let mut flushed = 0.0;
        scratch.out.extend(scratch.sums.iter().map(|s| {
            let x = s.total();
            if x < FLUSH_THRESHOLD {
                flushed += x.max(0.0);
                0.0
            } else {
                x
            }
        }));
        core::mem::swap(&mut dist.masses, &mut scratch.out);
        dist.flushed += flushed;
        dist.time_step += 1;
    }
}

/// Law after `steps` applications of `kernel`.
pub fn evolve(kernel: &LumpedKernel, start: &LumpedDistribution, steps: u64) -> LumpedDistribution {
    let mut dist = start.clone();
    let mut scratch = StepScratch::default();
    for _ in 0..steps {
        kernel.advance(&mut dist, &mut scratch);
    }
    dist
}

fn auto_storage(p: KneserParams) -> KernelStorage {
    if dense_kernel_feasible(p) {
        KernelStorage::Dense
    } else {
        KernelStorage::Streaming
    }
}

/// Lazily extended exact `d(t)` sequence.
#[derive(Debug, Clone)]
pub struct TvTracker {
    kernel: LumpedKernel,
    dist: LumpedDistribution,
    stationary: LumpedDistribution,
    scratch: StepScratch,
    values: Vec<f64>,
}

impl TvTracker {
    pub fn new(p: KneserParams) -> Self {
        Self::with_storage(p, auto_storage(p))
    }

    pub fn with_storage(p: KneserParams, storage: KernelStorage) -> Self {
        let kernel = build_kernel_with(p, LumpSpec::StartOverlap, storage);
        let dist = LumpedDistribution::initial(p, LumpSpec::StartOverlap);
        let stationary = stationary_lump(p, LumpSpec::StartOverlap);
        let first = dist.tv_distance(&stationary);
        Self {
            kernel,
            dist,
            stationary,
            scratch: StepScratch::default(),
            values: alloc::vec![first],
        }
    }

    pub fn params(&self) -> KneserParams {
        self.kernel.params()
    }

    /// Exact `d(t)`.
    pub fn d(&mut self, t: u64) -> Result<f64, EngineError> {
        self.extend_to(t)?;
        Ok(self.values[t as usize])
    }

    pub fn extend_to(&mut self, t: u64) -> Result<(), EngineError> {
        while (self.values.len() as u64) <= t {
            self.kernel.advance(&mut self.dist, &mut self.scratch);
            if self.dist.flushed > FLUSH_BUDGET {
                return Err(EngineError::FlushBudgetExceeded {
                    flushed: self.dist.flushed,
                });
            }
            self.values.push(self.dist.tv_distance(&self.stationary));
        }
        Ok(())
    }

    /// Values computed so far, indexed by `t`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Current lump law (at time `values().len() - 1`).
    pub fn current(&self) -> &LumpedDistribution {
        &self.dist
    }
}

/// A point of the exact distance profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvPoint {
    pub t: u64,
    pub d: f64,
}

/// `d(t) = (1/2) Σ_j |μ_t(j) - π(j)|` for `t = 0..=t_max`, via the
/// start-overlap lump.
pub fn exact_tv_profile(p: KneserParams, t_max: u64) -> Result<Vec<TvPoint>, EngineError> {
    exact_tv_profile_with(p, t_max, auto_storage(p))
}

pub fn exact_tv_profile_with(p: KneserParams, t_max: u64, storage: KernelStorage) -> Result<Vec<TvPoint>, EngineError> {
    let mut tracker = TvTracker::with_storage(p, storage);
    tracker.extend_to(t_max)?;
    Ok(tracker
        .values()
        .iter()
        .enumerate()
        .map(|(t, &d)| TvPoint { t: t as u64, d })
        .collect())
}

/// Exact `E f_t`, `Var f_t` for `t = 0..=t_max` from `f_0 = 0`.
pub fn f_moments(p: KneserParams, t_max: u64) -> Vec<MomentTrack> {
    f_moments_with(p, t_max, auto_storage(p))
}

pub fn f_moments_with(p: KneserParams, t_max: u64, storage: KernelStorage) -> Vec<MomentTrack> {
    let kernel = build_kernel_with(p, LumpSpec::ReferenceOverlap, storage);
    let mut dist = LumpedDistribution::initial(p, LumpSpec::ReferenceOverlap);
    let mut scratch = StepScratch::default();
    let mut out = Vec::with_capacity(t_max as usize + 1);
    out.push(dist.moments());
    for _ in 0..t_max {
        kernel.advance(&mut dist, &mut scratch);
        out.push(dist.moments());
    }
    out
}

/// Closed form of `E f_t`:
/// `n^2/(2n+k) + (-1)^{t+1} n(n+k) (n/(n+k))^{t+1} / (2n+k)`.
pub fn mean_f_closed_form(p: KneserParams, t: u64) -> f64 {
    let (n, k) = (p.n() as f64, p.k() as f64);
    let g = 2.0 * n + k;
    let decay = ((t + 1) as f64 * p.contraction().ln()).exp();
    let sign = if t % 2 == 0 { -1.0 } else { 1.0 };
    n * n / g + sign * n * (n + k) * decay / g
}

/// Rational twin of a lumped kernel, for small instances.
#[derive(Debug, Clone)]
pub struct ExactLumpedKernel {
    params: KneserParams,
    spec: LumpSpec,
    rows: Vec<Vec<ExactRational>>,
}

pub fn build_exact_kernel(p: KneserParams, spec: LumpSpec) -> ExactLumpedKernel {
    let len = p.n() as usize + 1;
    let rows = (0..len)
        .map(|from| {
            let (law, reflect) = row_law(p, spec, from);
            (0..len)
                .map(|to| {
                    let y = if reflect { p.n() as i64 - to as i64 } else { to as i64 };
                    law.pmf_exact(y)
                })
                .collect()
        })
        .collect();
    ExactLumpedKernel { params: p, spec, rows }
}

impl ExactLumpedKernel {
    pub fn params(&self) -> KneserParams {
        self.params
    }

    pub fn spec(&self) -> LumpSpec {
        self.spec
    }

    pub fn rows(&self) -> &[Vec<ExactRational>] {
        &self.rows
    }

    /// Exact point mass at the lump's initial state.
    pub fn initial(&self) -> Vec<ExactRational> {
        let mut v = alloc::vec![ExactRational::zero(); self.rows.len()];
        v[self.spec.initial_state(self.params)] = ExactRational::from_integer(1.into());
        v
    }

    pub fn step(&self, dist: &[ExactRational]) -> Vec<ExactRational> {
        let mut out = alloc::vec![ExactRational::zero(); self.rows.len()];
        for (mass, row) in dist.iter().zip(&self.rows) {
            if mass.is_zero() {
                continue;
            }
            for (o, p) in out.iter_mut().zip(row) {
                if !p.is_zero() {
                    *o += mass * p;
                }
            }
        }
        out
    }

    pub fn evolve(&self, start: &[ExactRational], steps: u64) -> Vec<ExactRational> {
        let mut dist = start.to_vec();
        for _ in 0..steps {
            dist = self.step(&dist);
        }
        dist
    }

    /// Exact total-variation distance of `dist` to the stationary lump.
    pub fn tv_to_stationary(&self, dist: &[ExactRational]) -> ExactRational {
        let pi = stationary_lump_exact(self.params);
        let total: ExactRational = dist
            .iter()
            .zip(&pi)
            .map(|(a, b)| num_traits::Signed::abs(&(a - b)))
            .sum();
        total / ExactRational::from_integer(2.into())
    }
}
