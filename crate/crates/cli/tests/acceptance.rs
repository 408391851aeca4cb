//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kneser_core::analysis::ProfileSource;
use kneser_core::bounds::{
    g_bound, stationary_f_moments, variance_constant, wilson_lower_analytic, wilson_lower_exact, SpectralUpper,
};
use kneser_core::engine::{build_exact_kernel, build_kernel, f_moments, LumpedDistribution, StepScratch, TvTracker};
use kneser_core::model::spectrum;
use kneser_core::montecarlo::{SimConfig, SimMode};
use kneser_core::oracle::{build_full_chain, certify_spectrum, oracle_tv};
use kneser_core::{rational_to_f64, ExactRational, KneserParams, LumpSpec};
use kneser_mix::parallel;

type Verdict = Result<String, String>;

fn params(n: u32, k: u32) -> KneserParams {
    KneserParams::new(n, k).unwrap()
}

fn floor_time(t: f64) -> u64 {
    t.floor().max(0.0) as u64
}

fn within_budget(start: Instant, budget: Duration, detail: String) -> Verdict {
    let el = start.elapsed();
    if el <= budget {
        Ok(format!(
            "{detail}; {:.2}s (budget {}s)",
            el.as_secs_f64(),
            budget.as_secs()
        ))
    } else {
        Err(format!(
            "{detail}; took {:.2}s, budget {}s",
            el.as_secs_f64(),
            budget.as_secs()
        ))
    }
}

const SMALL: [(u32, u32); 6] = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)];

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (n, k) in SMALL {
        let p = params(n, k);
        let chain = build_full_chain(p).map_err(|e| e.to_string())?;
        let reference = oracle_tv(&chain, 50).map_err(|e| e.to_string())?;
        let mut tracker = TvTracker::new(p);
        tracker.extend_to(50).map_err(|e| e.to_string())?;
        for (t, d) in &reference {
            let err = (rational_to_f64(d) - tracker.values()[*t as usize]).abs();
            worst = worst.max(err);
            if err > 1e-10 {
                return Err(format!("({n},{k}) t = {t}: |engine - oracle| = {err:e}"));
            }
        }
        for spec in [LumpSpec::StartOverlap, LumpSpec::ReferenceOverlap] {
            let laws = chain.lump_laws(spec, 50).map_err(|e| e.to_string())?;
            let kernel = build_exact_kernel(p, spec);
            let mut dist = kernel.initial();
            for (t, law) in laws.iter().enumerate() {
                if t > 0 {
                    dist = kernel.step(&dist);
                }
                if &dist != law {
                    return Err(format!(
                        "({n},{k}) {spec:?}: lumped law differs from pushforward at t = {t}"
                    ));
                }
            }
        }
    }
    within_budget(
        start,
        Duration::from_secs(10),
        format!("6 instances, t <= 50, max |error| {worst:.1e}, pushforwards exact"),
    )
}

fn spectrum_certification() -> Verdict {
    let start = Instant::now();
    for (n, k) in SMALL {
        let p = params(n, k);
        let chain = build_full_chain(p).map_err(|e| e.to_string())?;
        let checks = certify_spectrum(&chain, &spectrum(p), 6).map_err(|e| e.to_string())?;
        if let Some(c) = checks.iter().find(|c| !c.passed()) {
            return Err(format!("({n},{k}) trace identity fails at m = {}", c.power));
        }
    }
    let table = spectrum(params(2, 1));
    let mut got: Vec<(ExactRational, String)> = (0..=2)
        .map(|i| (table.eigenvalue_exact(i), table.multiplicity_exact(i).to_string()))
        .collect();
    got.sort();
    let q = |s: &str| s.parse::<ExactRational>().unwrap();
    let want = vec![
        (q("-2/3"), "4".to_string()),
        (q("1/3"), "5".to_string()),
        (q("1"), "1".to_string()),
    ];
    if got != want {
        return Err(format!("Petersen spectrum {got:?}"));
    }
    within_budget(
        start,
        Duration::from_secs(5),
        "m = 0..6 exact on 6 instances; Petersen {1 x1, 1/3 x5, -2/3 x4}".into(),
    )
}

const MOMENT_SET: [(u32, u32); 3] = [(100, 1), (500, 7), (100, 100)];
const LONG: u64 = 10_000;

/// `E f_t = n^2/(2n+k) + (-1)^(t+1) n(n+k)/(2n+k) (n/(n+k))^(t+1)`.
fn mean_formula(n: f64, k: f64, t: u64) -> f64 {
    let g = 2.0 * n + k;
    let sign = if t % 2 == 0 { -1.0 } else { 1.0 };
    n * n / g + sign * n * (n + k) / g * (n / (n + k)).powf(t as f64 + 1.0)
}

fn closed_form_mean() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (n, k) in MOMENT_SET {
        let m = f_moments(params(n, k), LONG);
        // f_0 = 0; the formula cancels to zero there
        if m[0].mean != 0.0 {
            return Err(format!("({n},{k}) E f_0 = {}", m[0].mean));
        }
        for track in &m[1..] {
            let want = mean_formula(n as f64, k as f64, track.time);
            let err = ((track.mean - want) / want).abs();
            worst = worst.max(err);
            if err > 1e-10 {
                return Err(format!("({n},{k}) t = {}: relative error {err:e}", track.time));
            }
        }
    }
    within_budget(
        start,
        Duration::from_secs(60),
        format!("t <= {LONG}, max relative error {worst:.1e}"),
    )
}

fn variance_domination() -> Verdict {
    let mut worst_ratio: f64 = 0.0;
    for (n, k) in MOMENT_SET {
        let p = params(n, k);
        let (nf, kf) = (n as f64, k as f64);
        let g = 2.0 * nf + kf;
        let var_f = nf * nf * (nf + kf) * (nf + kf) / (g * g * (g - 1.0));
        let (_, lib_var) = stationary_f_moments(p);
        if ((lib_var - var_f) / var_f).abs() > 1e-12 {
            return Err(format!("({n},{k}) stationary variance {lib_var} vs {var_f}"));
        }
        let cap = variance_constant(p) * var_f;
        for track in f_moments(p, LONG) {
            worst_ratio = worst_ratio.max(track.variance / cap);
            if track.variance > cap {
                return Err(format!(
                    "({n},{k}) t = {}: Var f_t = {} > C Var f = {cap}",
                    track.time, track.variance
                ));
            }
        }
    }
    let mut ratios = Vec::new();
    for k in [1, 10_000] {
        let p = params(10_000, k);
        let r = variance_constant(p) / (1.0 + k as f64 / 10_000.0);
        ratios.push(r);
        if !(0.9..=1.1).contains(&r) {
            return Err(format!("C/(1+k/n) = {r} at n = 10^4, k = {k}"));
        }
    }
    Ok(format!(
        "max Var f_t/(C Var f) = {worst_ratio:.4}; C/(1+k/n) = {:.6}, {:.6}",
        ratios[0], ratios[1]
    ))
}

fn sandwich_instances() -> Vec<(u32, u32)> {
    let mut v: Vec<(u32, u32)> = SMALL.to_vec();
    v.extend(MOMENT_SET);
    v.extend([(200, 1), (400, 1), (50, 50), (30, 4)]);
    v
}

fn bound_sandwich() -> Verdict {
    const SLACK: f64 = 1e-9;
    let mut points = 0usize;
    for (n, k) in sandwich_instances() {
        let p = params(n, k);
        let t_max = (p.t_star() + 6.0 * p.window_scale()).ceil() as u64;
        let mut tracker = TvTracker::new(p);
        tracker.extend_to(t_max).map_err(|e| e.to_string())?;
        let moments = f_moments(p, t_max);
        let stationary = stationary_f_moments(p);
        let upper = SpectralUpper::new(p);
        for t in 0..=t_max {
            let d = tracker.values()[t as usize];
            let analytic = wilson_lower_analytic(p, t as f64).value;
            let exact = wilson_lower_exact(&moments[t as usize], stationary)
                .map_err(|e| e.to_string())?
                .value;
            let up = upper.at(t).value;
            let chain = [
                ("analytic", analytic),
                ("exact-moment", exact),
                ("d", d),
                ("spectral", up),
            ];
            for w in chain.windows(2) {
                if w[0].1 > w[1].1 + SLACK {
                    return Err(format!(
                        "({n},{k}) t = {t}: {} {} > {} {}",
                        w[0].0, w[0].1, w[1].0, w[1].1
                    ));
                }
            }
            if let Some(gb) = g_bound(p, t as f64) {
                if up > gb + SLACK {
                    return Err(format!("({n},{k}) t = {t}: spectral {up} > g bound {gb}"));
                }
            }
            points += 1;
        }
    }
    Ok(format!("{points} (instance, t) points"))
}

fn upper_bound_desk_scale() -> Verdict {
    let start = Instant::now();
    let mut worst_gap = f64::NEG_INFINITY;
    for n in [100, 200, 400] {
        let p = params(n, 1);
        let s = SpectralUpper::new(p);
        for c in [0.5, 1.0, 2.0, 3.0] {
            let t = floor_time(p.t_star() + c * p.window_scale());
            let b = s.at(t).value;
            let limit = (-c).exp();
            worst_gap = worst_gap.max(b - limit);
            if b > limit + 1e-9 {
                return Err(format!("k = 1, n = {n}, c = {c}: bound {b} > e^-c = {limit}"));
            }
        }
    }
    for n in [50, 100] {
        let p = params(n, n);
        let s = SpectralUpper::new(p);
        for c in [1.0, 2.0, 3.0] {
            let t = floor_time(p.t_star() + c);
            let b = s.at(t).value;
            let limit = 2f64.powf(-c);
            worst_gap = worst_gap.max(b - limit);
            if b > limit + 1e-9 {
                return Err(format!("k = n = {n}, c = {c}: bound {b} > 2^-c = {limit}"));
            }
        }
    }
    within_budget(
        start,
        Duration::from_secs(30),
        format!("max (bound - limit) = {worst_gap:.4}"),
    )
}

fn lower_bound_desk_scale() -> Verdict {
    let start = Instant::now();
    let p = params(400, 1);
    let t = floor_time(p.t_star() - 3.0 * p.window_scale());
    let moments = f_moments(p, t);
    let lower = wilson_lower_exact(&moments[t as usize], stationary_f_moments(p))
        .map_err(|e| e.to_string())?
        .value;
    let d = TvTracker::new(p).d(t).map_err(|e| e.to_string())?;
    if lower < 0.97 {
        return Err(format!("t = {t}: exact-moment lower bound {lower} < 0.97"));
    }
    if d < lower {
        return Err(format!("t = {t}: d = {d} below lower bound {lower}"));
    }
    within_budget(
        start,
        Duration::from_secs(300),
        format!("t = {t}: lower bound {lower:.6}, d = {d:.6}"),
    )
}

fn cutoff_manifestation() -> Verdict {
    let start = Instant::now();
    let threads = kneser_mix::config::thread_count();
    let family: Vec<KneserParams> = [50, 100, 200, 400].iter().map(|&n| params(n, 1)).collect();
    let rows = parallel::cutoff_sweep(&family, 0.05, threads).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio.unwrap_or(f64::INFINITY)).collect();
    let listing = rows
        .iter()
        .map(|r| {
            format!(
                "n={}: {}/{} = {:.4}",
                r.params.n(),
                r.t_mix_eps,
                r.t_mix_complement,
                r.ratio.unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    let mut failures = Vec::new();
    if !ratios.windows(2).all(|w| w[1] < w[0]) {
        failures.push("ratios not strictly decreasing".to_string());
    }
    if !(ratios[3] <= 1.35) {
        failures.push(format!("ratio at n = 400 is {:.4} > 1.35", ratios[3]));
    }

    let grid: Vec<f64> = (-30..=30).map(|i| i as f64 / 10.0).collect();
    let probes: Vec<KneserParams> = [100, 200, 400].iter().map(|&n| params(n, 1)).collect();
    let profiles = parallel::window_sweep(&probes, &grid, threads).map_err(|e| e.to_string())?;
    let mut spread: f64 = 0.0;
    let mut spread_at = 0.0;
    for &c in &grid {
        let ds: Vec<f64> = profiles.iter().map(|pr| pr.d_at(c).unwrap()).collect();
        let s = ds.iter().cloned().fold(f64::MIN, f64::max) - ds.iter().cloned().fold(f64::MAX, f64::min);
        if s > spread {
            spread = s;
            spread_at = c;
        }
    }
    if spread > 0.1 {
        failures.push(format!("rescaled profiles differ by {spread:.4} at c = {spread_at}"));
    }
    debug_assert!(profiles.iter().all(|p| p.source == ProfileSource::Exact));
    let detail = format!("{listing}; max profile spread {spread:.4} at c = {spread_at}");
    if failures.is_empty() {
        within_budget(start, Duration::from_secs(900), detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn monte_carlo(p: KneserParams, mode: SimMode, seed: u64) -> Result<String, String> {
    let horizon = (2.0 * p.t_star()).ceil() as u64;
    let cfg = SimConfig::new(p, 100_000, horizon, seed, mode).map_err(|e| e.to_string())?;
    let one = parallel::simulate(&cfg, 1).map_err(|e| e.to_string())?;
    let many = parallel::simulate(&cfg, 4).map_err(|e| e.to_string())?;
    if one != many {
        return Err(format!("({},{}) sums differ between 1 and 4 threads", p.n(), p.k()));
    }
    let again = parallel::simulate(&cfg, 4).map_err(|e| e.to_string())?;
    if again != many {
        return Err(format!("({},{}) rerun differs", p.n(), p.k()));
    }
    let exact = f_moments(p, horizon);
    let mut worst: f64 = 0.0;
    for (e, x) in one.estimates().iter().zip(&exact) {
        for (emp, truth, se, what) in [
            (e.mean, x.mean, e.std_error, "mean"),
            (e.variance, x.variance, e.variance_std_error, "variance"),
        ] {
            let dev = (emp - truth).abs();
            if dev > 4.0 * se {
                return Err(format!(
                    "({},{}) t = {}: {what} {emp} vs exact {truth}, se {se}",
                    p.n(),
                    p.k(),
                    e.t
                ));
            }
            if se > 0.0 {
                worst = worst.max(dev / se);
            }
        }
    }
    Ok(format!(
        "({},{}) {mode:?} horizon {horizon}: max |z| {worst:.2}",
        p.n(),
        p.k()
    ))
}

fn monte_carlo_cross_validation() -> Verdict {
    let start = Instant::now();
    let a = monte_carlo(params(2, 1), SimMode::Explicit, 1)?;
    let b = monte_carlo(params(100, 1), SimMode::Lumped, 1)?;
    within_budget(
        start,
        Duration::from_secs(120),
        format!("{a}; {b}; identical across 1/4 threads and reruns"),
    )
}

fn monotone_and_conservative() -> Verdict {
    let mut worst_drift: f64 = 0.0;
    let mut worst_rise: f64 = 0.0;
    for (n, k) in sandwich_instances() {
        let p = params(n, k);
        let t_max = (p.t_star() + 6.0 * p.window_scale()).ceil() as u64;
        let mut tracker = TvTracker::new(p);
        tracker.extend_to(t_max).map_err(|e| e.to_string())?;
        for (t, w) in tracker.values().windows(2).enumerate() {
            worst_rise = worst_rise.max(w[1] - w[0]);
            if w[1] > w[0] + 1e-12 {
                return Err(format!("({n},{k}) d rises from t = {t}: {} -> {}", w[0], w[1]));
            }
        }
    }
    for (n, k) in MOMENT_SET {
        let p = params(n, k);
        for spec in [LumpSpec::StartOverlap, LumpSpec::ReferenceOverlap] {
            let kernel = build_kernel(p, spec);
            let mut dist = LumpedDistribution::initial(p, spec);
            let mut scratch = StepScratch::default();
            for t in 1..=LONG {
                kernel.advance(&mut dist, &mut scratch);
                let drift = (dist.total_mass() - 1.0).abs();
                worst_drift = worst_drift.max(drift);
                if drift > 1e-12 {
                    return Err(format!("({n},{k}) {spec:?} t = {t}: mass drift {drift:e}"));
                }
            }
        }
    }
    Ok(format!(
        "max rise {worst_rise:.1e}; max mass drift over {LONG} steps {worst_drift:.1e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("spectrum certification", spectrum_certification),
        ("closed-form mean", closed_form_mean),
        ("variance domination", variance_domination),
        ("bound sandwich", bound_sandwich),
        ("upper bound at desk scale", upper_bound_desk_scale),
        ("lower bound at desk scale", lower_bound_desk_scale),
        ("cutoff manifestation", cutoff_manifestation),
        ("Monte Carlo cross-validation", monte_carlo_cross_validation),
        ("monotonicity and conservation", monotone_and_conservative),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| name.contains(f.as_str()) || id.ends_with(f.as_str()))
        {
            continue;
        }
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match verdict {
            Ok(detail) => println!("{id} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL  {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
