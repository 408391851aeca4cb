//! Thread-pool drivers. Work is split into fixed pieces independent of the
//! worker count and results are combined in input order, so output never
//! depends on the number of threads.

use std::ops::Range;

use anyhow::Result;
use kneser_core::analysis::{cutoff_row, window_probe, AnalysisError, CutoffProfile, CutoffRow, ProfileSource};
use kneser_core::engine::KernelStorage;
use kneser_core::montecarlo::{simulate_range, MomentSums, SimConfig, WalkPlan};
use kneser_core::KneserParams;
use rayon::prelude::*;

/// Walks per work item.
pub const WALK_CHUNK: u64 = 2048;

pub fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?)
}

fn walk_chunks(walks: u64) -> Vec<Range<u64>> {
    (0..walks.div_ceil(WALK_CHUNK))
        .map(|i| i * WALK_CHUNK..((i + 1) * WALK_CHUNK).min(walks))
        .collect()
}

/// Moment sums over all walks of `cfg`, on `threads` workers.
pub fn simulate(cfg: &SimConfig, threads: usize) -> Result<MomentSums> {
    let plan = WalkPlan::new(cfg);
    let parts: Vec<MomentSums> = pool(threads)?.install(|| {
        walk_chunks(cfg.walks)
            .into_par_iter()
            .map(|r| simulate_range(cfg, &plan, r))
            .collect()
    });
    let mut total = MomentSums::new(cfg.horizon);
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

/// `t_mix(ε)/t_mix(1-ε)` rows for a parameter family, in input order.
pub fn cutoff_sweep(ps: &[KneserParams], eps: f64, threads: usize) -> Result<Vec<CutoffRow>> {
    let rows: Result<Vec<_>, AnalysisError> = pool(threads)?.install(|| {
        ps.par_iter()
            .map(|&p| cutoff_row(p, eps, KernelStorage::Dense))
            .collect()
    });
    Ok(rows?)
}

/// Exact window probes for a parameter family, in input order.
pub fn window_sweep(ps: &[KneserParams], c_grid: &[f64], threads: usize) -> Result<Vec<CutoffProfile>> {
    let rows: Result<Vec<_>, AnalysisError> = pool(threads)?.install(|| {
        ps.par_iter()
            .map(|&p| window_probe(p, c_grid, ProfileSource::Exact, KernelStorage::Dense))
            .collect()
    });
    Ok(rows?)
}
