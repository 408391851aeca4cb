//! Upper and lower bounds on `d(t)`.
//!
//! Upper: the transitive spectral bound `4 d(t)^2 <= Σ_{i>=1} m_i λ_i^{2t}`
//! and its closed-form relaxation through `g(t) = (1+k/n)^{-2t} (2n+k)`.
//! Lower: the distinguishing-statistic bound `d >= 1 - 8/r^2`, where `r` is
//! the mean gap of `f_t = |X_t ∩ {1..n}|` over a common standard deviation,
//! evaluated either from exact moments or from the closed-form chain.

#[allow(unused_imports)] // shadowed by inherent f64 math when std is linked
use num_traits::Float;

use crate::combinatorics::{log_sum_exp, LogValue};
use crate::engine::MomentTrack;
use crate::model::{spectrum, stationary_hypergeometric, KneserParams, SpectrumTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error("degenerate common standard deviation sigma* = 0")]
    DegenerateSigma,
    #[error("bound configuration enables no variant")]
    NoVariant,
}

/// A bound clamped to `[0, 1]` together with its unclamped value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub raw: f64,
}

impl Bound {
    fn upper(raw: f64) -> Self {
        Self {
            value: raw.min(1.0),
            raw,
        }
    }

    fn lower(raw: f64) -> Self {
        Self {
            value: raw.max(0.0),
            raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundVariants {
    pub spectral_full: bool,
    pub g_closed_form: bool,
    pub wilson_exact_moments: bool,
    pub wilson_analytic: bool,
}

impl BoundVariants {
    pub const ALL: BoundVariants = BoundVariants {
        spectral_full: true,
        g_closed_form: true,
        wilson_exact_moments: true,
        wilson_analytic: true,
    };

    /// Variants that need no evolution of the walk's law.
    pub const CLOSED_FORM: BoundVariants = BoundVariants {
        spectral_full: true,
        g_closed_form: true,
        wilson_exact_moments: false,
        wilson_analytic: true,
    };

    fn any(&self) -> bool {
        self.spectral_full || self.g_closed_form || self.wilson_exact_moments || self.wilson_analytic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundConfig {
    params: KneserParams,
    variants: BoundVariants,
}

impl BoundConfig {
    pub fn new(params: KneserParams, variants: BoundVariants) -> Result<Self, BoundError> {
        if !variants.any() {
            return Err(BoundError::NoVariant);
        }
        Ok(Self { params, variants })
    }

    pub fn params(&self) -> KneserParams {
        self.params
    }

    pub fn variants(&self) -> BoundVariants {
        self.variants
    }
}

/// Spectral upper bound evaluator holding the spectrum table.
#[derive(Debug, Clone)]
pub struct SpectralUpper {
    table: SpectrumTable,
}

impl SpectralUpper {
    pub fn new(p: KneserParams) -> Self {
        Self { table: spectrum(p) }
    }

    pub fn table(&self) -> &SpectrumTable {
        &self.table
    }

    /// `Σ_{i=1}^{n} m_i |λ_i|^{2t}` in log domain.
    pub fn eigen_sum(&self, t: u64) -> LogValue {
        let two_t = 2.0 * t as f64;
        log_sum_exp(
            self.table.entries()[1..]
                .iter()
                .map(|e| e.multiplicity * e.magnitude.powf(two_t)),
        )
    }

    /// `min(1, (1/2) sqrt(Σ m_i λ_i^{2t}))`.
    pub fn at(&self, t: u64) -> Bound {
        let half_sqrt = self.eigen_sum(t).sqrt().ln() - core::f64::consts::LN_2;
        Bound::upper(half_sqrt.exp())
    }
}

pub fn spectral_upper(p: KneserParams, t: u64) -> f64 {
    SpectralUpper::new(p).at(t).value
}

/// `g(t) = (1 + k/n)^{-2t} (2n + k)` for real `t`.
pub fn g_value(p: KneserParams, t: f64) -> f64 {
    let ratio = p.k() as f64 / p.n() as f64;
    (-2.0 * t * ratio.ln_1p()).exp() * p.ground_size() as f64
}

/// `sqrt(g(t)/2)` when `g(t) <= 1/2`; `None` when the bound does not apply.
pub fn g_bound(p: KneserParams, t: f64) -> Option<f64> {
    let g = g_value(p, t);
    (g <= 0.5).then(|| (g / 2.0).sqrt())
}

/// Finite-`n` constant with `Var f_t <= C(n,k) Var f` for all `t`:
/// `C(n,k) = (1 + k/n) (n+k)/(n+k-1)`.
///
/// From the bound `Var f_t <= n(n+k)^2 / (4(2n+k)(n+k-1))`, which equals
/// `n(1+k/n)/(4(2+k/n)) · (n+k)/(n+k-1)`, and `Var f >= n/(4(2+k/n))`.
/// Always `>= 1`.
pub fn variance_constant(p: KneserParams) -> f64 {
    let (n, k) = (p.n() as f64, p.k() as f64);
    (1.0 + k / n) * (n + k) / (n + k - 1.0)
}

/// Uniform upper bound on `Var f_t`: `n(n+k)^2 / (4(2n+k)(n+k-1))`.
pub fn variance_ceiling(p: KneserParams) -> f64 {
    let (n, k) = (p.n() as f64, p.k() as f64);
    n * (n + k) * (n + k) / (4.0 * (2.0 * n + k) * (n + k - 1.0))
}

/// Stationary moments of `f`: mean `n^2/(2n+k)`, variance
/// `n^2(n+k)^2/((2n+k)^2(2n+k-1))`.
pub fn stationary_f_moments(p: KneserParams) -> (f64, f64) {
    stationary_hypergeometric(p).moments()
}

/// Ingredients of the `1 - 8/r^2` bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonInputs {
    pub mean_gap: f64,
    pub sigma_star: f64,
    pub r: f64,
}

impl WilsonInputs {
    pub fn new(mean_gap: f64, sigma_star: f64) -> Result<Self, BoundError> {
        if !(sigma_star > 0.0) {
            return Err(BoundError::DegenerateSigma);
        }
        let mean_gap = mean_gap.abs();
        Ok(Self {
            mean_gap,
            sigma_star,
            r: mean_gap / sigma_star,
        })
    }

    pub fn lower_bound(&self) -> Bound {
        Bound::lower(1.0 - 8.0 / (self.r * self.r))
    }
}

/// Wilson inputs from exact moments of `f_t` and of `f` under stationarity.
pub fn wilson_inputs_exact(track: &MomentTrack, stationary: (f64, f64)) -> Result<WilsonInputs, BoundError> {
    let (mean, var) = stationary;
    let sigma = track.variance.max(var).sqrt();
    WilsonInputs::new(track.mean - mean, sigma)
}

/// `max(0, 1 - 8/r^2)` with `σ*^2 = max(Var f_t, Var f)` from exact moments.
pub fn wilson_lower_exact(track: &MomentTrack, stationary: (f64, f64)) -> Result<Bound, BoundError> {
    Ok(wilson_inputs_exact(track, stationary)?.lower_bound())
}

/// `g̃(t) = sqrt(2n+k-1)/C(n,k) · (1+k/n)^{-t-1}`.
pub fn g_tilde(p: KneserParams, t: f64) -> f64 {
    let ratio = p.k() as f64 / p.n() as f64;
    let scale = ((p.ground_size() - 1) as f64).sqrt() / variance_constant(p);
    scale * (-(t + 1.0) * ratio.ln_1p()).exp()
}

/// Closed-form Wilson inputs: gap `n(n+k)/(2n+k) (n/(n+k))^{t+1}` and
/// `σ* = C(n,k) n(n+k)/((2n+k) sqrt(2n+k-1))`, so that `r = g̃(t)`.
pub fn wilson_inputs_analytic(p: KneserParams, t: f64) -> WilsonInputs {
    let (n, k) = (p.n() as f64, p.k() as f64);
    let g = 2.0 * n + k;
    let gap = n * (n + k) / g * ((t + 1.0) * p.contraction().ln()).exp();
    let sigma = variance_constant(p) * n * (n + k) / (g * (g - 1.0).sqrt());
    WilsonInputs::new(gap, sigma).expect("analytic sigma is positive")
}

/// `max(0, 1 - 8/g̃(t)^2)`.
pub fn wilson_lower_analytic(p: KneserParams, t: f64) -> Bound {
    wilson_inputs_analytic(p, t).lower_bound()
}

/// Limiting lower bound at `t* - c n/k` (`k = o(n)`):
/// `1 - 8 (1+k/n)^{-2c n/k}`, the `(1 + o(1))` factors dropped.
pub fn lower_asymptotic_small_k(p: KneserParams, c: f64) -> f64 {
    let ratio = p.k() as f64 / p.n() as f64;
    1.0 - 8.0 * (-2.0 * c * p.window_scale() * ratio.ln_1p()).exp()
}

/// Limiting lower bound at `t* - c` (`k = Θ(n)`):
/// `1 - 8 (1+k/n)^{-2c+4}`, the `(1 + o(1))` factor dropped.
pub fn lower_asymptotic_linear_k(p: KneserParams, c: f64) -> f64 {
    let ratio = p.k() as f64 / p.n() as f64;
    1.0 - 8.0 * ((4.0 - 2.0 * c) * ratio.ln_1p()).exp()
}
