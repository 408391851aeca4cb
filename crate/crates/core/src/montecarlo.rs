//! Seeded simulation of the walk, as explicit `n`-subsets or through the
//! lumped statistic `f_t`, for statistical cross-checks of exact moments.
//!
//! Walk `w` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `w`, so a
//! walk's path depends only on `(seed, w)`. Per-time sums of `f_t^p` are
//! kept as integers; merging partial sums is exact and order-independent.

use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)] // shadowed by inherent f64 math when std is linked
use num_traits::Float;

use crate::combinatorics::{HypergeometricParams, LogFactorials};
use crate::model::KneserParams;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("simulation needs at least one walk")]
    NoWalks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    Explicit,
    Lumped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub params: KneserParams,
    pub walks: u64,
    pub horizon: u64,
    pub seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    pub fn new(params: KneserParams, walks: u64, horizon: u64, seed: u64, mode: SimMode) -> Result<Self, SimError> {
        if walks == 0 {
            return Err(SimError::NoWalks);
        }
        Ok(Self {
            params,
            walks,
            horizon,
            seed,
            mode,
        })
    }
}

/// Generator for walk `walk` under `seed`.
pub fn walk_rng(seed: u64, walk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walk);
    rng
}

/// Current vertex of an explicit walk: a sorted `n`-subset of `{1..2n+k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkState {
    set: Vec<u32>,
    time: u64,
}

impl WalkState {
    /// The start vertex `{n+1, ..., 2n}`.
    pub fn start(p: KneserParams) -> Self {
        Self {
            set: (p.n() + 1..=2 * p.n()).collect(),
            time: 0,
        }
    }

    /// Panics unless `set` is a strictly increasing `n`-subset of `{1..2n+k}`.
    pub fn from_set(p: KneserParams, set: Vec<u32>, time: u64) -> Self {
        assert_eq!(set.len(), p.n() as usize, "wrong subset size");
        assert!(set.windows(2).all(|w| w[0] < w[1]), "subset not sorted/distinct");
        assert!(
            set.iter().all(|&x| x >= 1 && x as u64 <= p.ground_size()),
            "element out of range"
        );
        Self { set, time }
    }

    pub fn set(&self) -> &[u32] {
        &self.set
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// `|X ∩ {1..n}|`.
    pub fn statistic(&self, n: u32) -> u32 {
        self.set.partition_point(|&x| x <= n) as u32
    }
}

/// One explicit step: a uniform `n`-subset of the complement, via a partial
/// Fisher–Yates shuffle.
pub fn step_explicit<R: Rng + ?Sized>(p: KneserParams, state: &WalkState, rng: &mut R) -> WalkState {
    let mut complement = Vec::with_capacity(p.n() as usize + p.k() as usize);
    let mut it = state.set.iter().peekable();
    for x in 1..=p.ground_size() as u32 {
        if it.peek() == Some(&&x) {
            it.next();
        } else {
            complement.push(x);
        }
    }
    let n = p.n() as usize;
    let len = complement.len();
    for i in 0..n {
        let j = rng.random_range(i..len);
        complement.swap(i, j);
    }
    complement.truncate(n);
    complement.sort_unstable();
    WalkState {
        set: complement,
        time: state.time + 1,
    }
}

/// Inverse-CDF sampler for one hypergeometric law.
#[derive(Debug, Clone)]
pub struct HypergeometricSampler {
    lo: u64,
    cdf: Vec<f64>,
}

impl HypergeometricSampler {
    pub fn new(p: HypergeometricParams) -> Self {
        Self::with_factorials(p, &LogFactorials::new(p.population()))
    }

    pub fn with_factorials(p: HypergeometricParams, table: &LogFactorials) -> Self {
        let (lo, _) = p.support();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = p
            .pmf_vec(table)
            .into_iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        *cdf.last_mut().expect("support is never empty") = 1.0;
        Self { lo, cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.lo + idx as u64
    }
}

pub fn sample_hypergeometric<R: Rng + ?Sized>(p: HypergeometricParams, rng: &mut R) -> u64 {
    HypergeometricSampler::new(p).sample(rng)
}

/// Lumped step `f -> n - Y`, `Y ~ H(n+k, f+k, n)`, with one sampler per state.
#[derive(Debug, Clone)]
pub struct LumpedStepper {
    n: u32,
    samplers: Vec<HypergeometricSampler>,
}

impl LumpedStepper {
    pub fn new(p: KneserParams) -> Self {
        let (n, k) = (p.n() as u64, p.k() as u64);
        let table = LogFactorials::new(n + k);
        let samplers = (0..=n)
            .map(|s| {
                let law = HypergeometricParams::new(n + k, s + k, n).expect("s + k <= n + k");
                HypergeometricSampler::with_factorials(law, &table)
            })
            .collect();
        Self { n: p.n(), samplers }
    }

    pub fn step<R: Rng + ?Sized>(&self, f: u32, rng: &mut R) -> u32 {
        self.n - self.samplers[f as usize].sample(rng) as u32
    }
}

/// Integer sums of `f_t, f_t^2, f_t^3, f_t^4` per time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSums {
    walks: u64,
    sums: Vec<[u128; 4]>,
}

impl MomentSums {
    pub fn new(horizon: u64) -> Self {
        Self {
            walks: 0,
            sums: alloc::vec![[0; 4]; horizon as usize + 1],
        }
    }

    pub fn walks(&self) -> u64 {
        self.walks
    }

    fn record(&mut self, t: usize, f: u32) {
        let f = f as u128;
        let s = &mut self.sums[t];
        s[0] += f;
        s[1] += f * f;
        s[2] += f * f * f;
        s[3] += f * f * f * f;
    }

    pub fn merge(&mut self, other: &MomentSums) {
        assert_eq!(self.sums.len(), other.sums.len(), "horizons differ");
        self.walks += other.walks;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            for i in 0..4 {
                a[i] += b[i];
            }
        }
    }

    pub fn estimates(&self) -> Vec<MomentEstimate> {
        let w = self.walks;
        let wf = w as f64;
        self.sums
            .iter()
            .enumerate()
            .map(|(t, s)| {
                let mean = s[0] as f64 / wf;
                let variance = if w > 1 {
                    // N Σf² - (Σf)² >= 0 by Cauchy–Schwarz, computed exactly
                    (w as u128 * s[1] - s[0] * s[0]) as f64 / (wf * (wf - 1.0))
                } else {
                    0.0
                };
                let (r2, r3, r4) = (s[1] as f64 / wf, s[2] as f64 / wf, s[3] as f64 / wf);
                let central4 = r4 - 4.0 * mean * r3 + 6.0 * mean * mean * r2 - 3.0 * mean.powi(4);
                let central2 = (r2 - mean * mean).max(0.0);
                MomentEstimate {
                    t: t as u64,
                    mean,
                    variance,
                    std_error: (variance / wf).sqrt(),
                    variance_std_error: ((central4 - central2 * central2).max(0.0) / wf).sqrt(),
                }
            })
            .collect()
    }
}

/// Empirical moments of `f_t` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub t: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of `mean`.
    pub std_error: f64,
    /// Asymptotic standard error of `variance`.
    pub variance_std_error: f64,
}

/// Per-configuration state shared by all walks.
#[derive(Debug, Clone)]
pub enum WalkPlan {
    Explicit,
    Lumped(LumpedStepper),
}

impl WalkPlan {
    pub fn new(cfg: &SimConfig) -> Self {
        match cfg.mode {
            SimMode::Explicit => WalkPlan::Explicit,
            SimMode::Lumped => WalkPlan::Lumped(LumpedStepper::new(cfg.params)),
        }
    }
}

/// Path `f_0, ..., f_horizon` of walk `walk`.
pub fn walk_path(cfg: &SimConfig, plan: &WalkPlan, walk: u64) -> Vec<u32> {
    let mut path = Vec::with_capacity(cfg.horizon as usize + 1);
    visit_walk(cfg, plan, walk, |_, f| path.push(f));
    path
}

fn visit_walk(cfg: &SimConfig, plan: &WalkPlan, walk: u64, mut visit: impl FnMut(usize, u32)) {
    let mut rng = walk_rng(cfg.seed, walk);
    let n = cfg.params.n();
    match plan {
        WalkPlan::Explicit => {
            let mut state = WalkState::start(cfg.params);
            visit(0, state.statistic(n));
            for t in 1..=cfg.horizon as usize {
                state = step_explicit(cfg.params, &state, &mut rng);
                visit(t, state.statistic(n));
            }
        }
        WalkPlan::Lumped(stepper) => {
            let mut f = 0;
            visit(0, f);
            for t in 1..=cfg.horizon as usize {
                f = stepper.step(f, &mut rng);
                visit(t, f);
            }
        }
    }
}

/// Sums over the walks in `walks`.
pub fn simulate_range(cfg: &SimConfig, plan: &WalkPlan, walks: Range<u64>) -> MomentSums {
    let mut sums = MomentSums::new(cfg.horizon);
    for w in walks {
        visit_walk(cfg, plan, w, |t, f| sums.record(t, f));
        sums.walks += 1;
    }
    sums
}

/// Sequential estimate over all walks of `cfg`.
pub fn estimate_f_moments(cfg: &SimConfig) -> Vec<MomentEstimate> {
    let plan = WalkPlan::new(cfg);
    simulate_range(cfg, &plan, 0..cfg.walks).estimates()
}
