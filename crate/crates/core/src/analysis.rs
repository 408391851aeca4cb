//! Mixing times, per-time profiles and cutoff diagnostics.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent f64 math when std is linked
use num_traits::Float;

use crate::bounds::{
    g_bound, stationary_f_moments, wilson_lower_analytic, wilson_lower_exact, BoundVariants, SpectralUpper,
};
use crate::engine::{f_moments_with, EngineError, KernelStorage, TvTracker};
use crate::model::KneserParams;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("epsilon {0} outside (0, 1)")]
    EpsilonOutOfRange(f64),
    #[error("d(t) >= {eps} still at t = {t}; profile did not converge")]
    NonConvergence { eps: f64, t: u64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Where the distances in a report come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileSource {
    Exact,
    BoundsOnly,
}

/// One row of a time profile. `None` marks a quantity not computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub t: u64,
    pub d_exact: Option<f64>,
    pub spectral_upper: Option<f64>,
    pub g_bound: Option<f64>,
    pub wilson_lower_exact: Option<f64>,
    pub wilson_lower_analytic: Option<f64>,
    pub ef_t: Option<f64>,
    pub varf_t: Option<f64>,
    pub spectral_upper_raw: Option<f64>,
    pub wilson_lower_exact_raw: Option<f64>,
    pub wilson_lower_analytic_raw: Option<f64>,
}

/// Rows `t = 0..=t_max`. Exact columns are filled when `source` is exact;
/// bound columns follow `variants`.
pub fn profile(
    p: KneserParams,
    t_max: u64,
    source: ProfileSource,
    variants: BoundVariants,
    storage: KernelStorage,
) -> Result<Vec<ProfileRow>, AnalysisError> {
    let exact = source == ProfileSource::Exact;
    let (tv, moments) = if exact {
        let mut tracker = TvTracker::with_storage(p, storage);
        tracker.extend_to(t_max)?;
        (tracker.values().to_vec(), f_moments_with(p, t_max, storage))
    } else {
        (Vec::new(), Vec::new())
    };
    let stationary = stationary_f_moments(p);
    let spectral = variants.spectral_full.then(|| SpectralUpper::new(p));
    let mut rows = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        let mut row = ProfileRow {
            t,
            d_exact: None,
            spectral_upper: None,
            g_bound: None,
            wilson_lower_exact: None,
            wilson_lower_analytic: None,
            ef_t: None,
            varf_t: None,
            spectral_upper_raw: None,
            wilson_lower_exact_raw: None,
            wilson_lower_analytic_raw: None,
        };
        if let Some(s) = &spectral {
            let b = s.at(t);
            row.spectral_upper = Some(b.value);
            row.spectral_upper_raw = Some(b.raw);
        }
        if variants.g_closed_form {
            row.g_bound = g_bound(p, t as f64);
        }
        if variants.wilson_analytic {
            let b = wilson_lower_analytic(p, t as f64);
            row.wilson_lower_analytic = Some(b.value);
            row.wilson_lower_analytic_raw = Some(b.raw);
        }
        if exact {
            let m = &moments[t as usize];
            row.d_exact = Some(tv[t as usize]);
            row.ef_t = Some(m.mean);
            row.varf_t = Some(m.variance);
            if variants.wilson_exact_moments {
                // σ* >= sqrt(Var f) > 0 for every valid parameter pair
                let b = wilson_lower_exact(m, stationary).expect("stationary variance is positive");
                row.wilson_lower_exact = Some(b.value);
                row.wilson_lower_exact_raw = Some(b.raw);
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Step cap before a mixing-time search gives up: `100 t*`, at least 100.
pub fn convergence_cap(p: KneserParams) -> u64 {
    (100.0 * p.t_star()).ceil().max(100.0) as u64
}

/// `min { t : d(t) < eps }`, extending the tracker as needed.
pub fn mixing_time(tracker: &mut TvTracker, eps: f64) -> Result<u64, AnalysisError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AnalysisError::EpsilonOutOfRange(eps));
    }
    let cap = convergence_cap(tracker.params());
    if let Some(t) = tracker.values().iter().position(|&d| d < eps) {
        return Ok(t as u64);
    }
    let mut t = tracker.values().len() as u64;
    loop {
        if t > cap {
            return Err(AnalysisError::NonConvergence { eps, t: cap });
        }
        if tracker.d(t)? < eps {
            return Ok(t);
        }
        t += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub params: KneserParams,
    pub epsilons: Vec<f64>,
    /// `(ε, t_mix(ε))` in the order of `epsilons`.
    pub t_mix: Vec<(f64, u64)>,
    pub t_star: f64,
    /// `n / k`.
    pub window_scale: f64,
    /// `t_mix(ε)/t_mix(1-ε)` for the smallest requested `ε`; `None` when
    /// `t_mix(1-ε) = 0`.
    pub cutoff_ratio: Option<f64>,
    /// `|t_mix(1/4) - t*| / (n/k)`.
    pub window_constant: f64,
    pub profile_source: ProfileSource,
}

pub fn mixing_report(p: KneserParams, epsilons: &[f64], storage: KernelStorage) -> Result<MixingReport, AnalysisError> {
    let mut tracker = TvTracker::with_storage(p, storage);
    let t_mix = epsilons
        .iter()
        .map(|&eps| Ok((eps, mixing_time(&mut tracker, eps)?)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let cutoff_ratio = match epsilons
        .iter()
        .copied()
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.min(e))))
    {
        Some(eps) => {
            let lo = mixing_time(&mut tracker, eps)?;
            let hi = mixing_time(&mut tracker, 1.0 - eps)?;
            (hi > 0).then(|| lo as f64 / hi as f64)
        }
        None => None,
    };
    let quarter = mixing_time(&mut tracker, 0.25)?;
    Ok(MixingReport {
        params: p,
        epsilons: epsilons.to_vec(),
        t_mix,
        t_star: p.t_star(),
        window_scale: p.window_scale(),
        cutoff_ratio,
        window_constant: (quarter as f64 - p.t_star()).abs() / p.window_scale(),
        profile_source: ProfileSource::Exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffRow {
    pub params: KneserParams,
    pub t_mix_eps: u64,
    pub t_mix_complement: u64,
    /// `t_mix(ε) / t_mix(1-ε)`; `None` when the denominator is zero.
    pub ratio: Option<f64>,
}

pub fn cutoff_row(p: KneserParams, eps: f64, storage: KernelStorage) -> Result<CutoffRow, AnalysisError> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(AnalysisError::EpsilonOutOfRange(eps));
    }
    let mut tracker = TvTracker::with_storage(p, storage);
    let lo = mixing_time(&mut tracker, eps)?;
    let hi = mixing_time(&mut tracker, 1.0 - eps)?;
    Ok(CutoffRow {
        params: p,
        t_mix_eps: lo,
        t_mix_complement: hi,
        ratio: (hi > 0).then(|| lo as f64 / hi as f64),
    })
}

/// `t_mix(ε)/t_mix(1-ε)` for each member of a family, in input order.
pub fn cutoff_diagnostic(ps: &[KneserParams], eps: f64) -> Result<Vec<CutoffRow>, AnalysisError> {
    ps.iter().map(|&p| cutoff_row(p, eps, KernelStorage::Dense)).collect()
}

/// Distance at one window offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPoint {
    pub c: f64,
    /// `max(0, floor(t* + c n/k))`.
    pub t: u64,
    pub d_exact: Option<f64>,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile {
    pub params: KneserParams,
    pub source: ProfileSource,
    pub points: Vec<CutoffPoint>,
}

impl CutoffProfile {
    /// Exact distance probed at offset `c`, if any.
    pub fn d_at(&self, c: f64) -> Option<f64> {
        self.points.iter().find(|pt| pt.c == c).and_then(|pt| pt.d_exact)
    }
}

/// Time probed for window offset `c`: `max(0, floor(t* + c n/k))`.
pub fn window_time(p: KneserParams, c: f64) -> u64 {
    (p.t_star() + c * p.window_scale()).floor().max(0.0) as u64
}

/// `d(floor(t* + c n/k))` for each `c` in the grid. Exact values come from
/// the start-overlap lump; the bound pair is the spectral upper bound and
/// the exact-moment (or, bounds-only, analytic) lower bound.
pub fn window_probe(
    p: KneserParams,
    c_grid: &[f64],
    source: ProfileSource,
    storage: KernelStorage,
) -> Result<CutoffProfile, AnalysisError> {
    let upper = SpectralUpper::new(p);
    let times: Vec<u64> = c_grid.iter().map(|&c| window_time(p, c)).collect();
    let t_max = times.iter().copied().max().unwrap_or(0);
    let (mut tracker, moments) = match source {
        ProfileSource::Exact => (
            Some(TvTracker::with_storage(p, storage)),
            f_moments_with(p, t_max, storage),
        ),
        ProfileSource::BoundsOnly => (None, Vec::new()),
    };
    let stationary = stationary_f_moments(p);
    let mut points = Vec::with_capacity(c_grid.len());
    for (&c, &t) in c_grid.iter().zip(&times) {
        let (d_exact, lower) = match tracker.as_mut() {
            Some(tr) => {
                let lower = wilson_lower_exact(&moments[t as usize], stationary)
                    .expect("stationary variance is positive")
                    .value;
                (Some(tr.d(t)?), lower)
            }
            None => (None, wilson_lower_analytic(p, t as f64).value),
        };
        points.push(CutoffPoint {
            c,
            t,
            d_exact,
            upper: upper.at(t).value,
            lower,
        });
    }
    Ok(CutoffProfile {
        params: p,
        source,
        points,
    })
}

/// Parses `a:b:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Option<Vec<f64>> {
    let mut parts = spec.split(':');
    let a: f64 = parts.next()?.trim().parse().ok()?;
    let b: f64 = parts.next()?.trim().parse().ok()?;
    let step: f64 = parts.next()?.trim().parse().ok()?;
    if parts.next().is_some() || !(step > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
        return None;
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Some((0..=count).map(|i| a + i as f64 * step).collect())
}
