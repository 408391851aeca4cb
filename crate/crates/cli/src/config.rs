//! Resolved run configuration, embedded verbatim in every report.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use kneser_core::analysis::parse_grid;
use kneser_core::engine::{dense_kernel_feasible, kernel_entry_count, KernelStorage, DENSE_ENTRY_LIMIT};
use kneser_core::montecarlo::SimMode;
use kneser_core::oracle::MAX_HORIZON;
use kneser_core::KneserParams;
use serde::{Deserialize, Serialize};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "KNESER_MIX_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Profile,
    Mix,
    Window,
    Simulate,
    OracleCheck,
    Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Explicit,
    Lumped,
}

impl From<Mode> for SimMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Explicit => SimMode::Explicit,
            Mode::Lumped => SimMode::Lumped,
        }
    }
}

/// Everything a run depends on, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: u32,
    pub k: u32,
    pub t_max: u64,
    pub c_grid: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub bounds_only: bool,
    pub stream_rows: bool,
    pub walks: u64,
    pub horizon: u64,
    pub seed: u64,
    pub mode: Mode,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Raw flag values before defaults and validation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub t_max: Option<u64>,
    pub c_grid: Option<String>,
    pub epsilons: Vec<f64>,
    pub bounds_only: bool,
    pub stream_rows: bool,
    pub walks: Option<u64>,
    pub horizon: Option<u64>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_C_GRID: &str = "-3:3:0.5";
pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_WALKS: u64 = 10_000;
pub const DEFAULT_ORACLE_HORIZON: u64 = 50;

impl RawConfig {
    pub fn resolve(self, command: Command) -> Result<RunConfig> {
        let n = self.n.context("--n is required")?;
        let k = self.k.context("--k is required")?;
        let p = KneserParams::new(n, k)?;

        let c_spec = self.c_grid.as_deref().unwrap_or(DEFAULT_C_GRID);
        let c_grid = parse_grid(c_spec)
            .with_context(|| format!("bad --c-grid '{c_spec}', expected a:b:step with a <= b, step > 0"))?;

        let epsilons = if self.epsilons.is_empty() {
            vec![DEFAULT_EPSILON]
        } else {
            self.epsilons
        };
        if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            bail!("--eps {e} outside (0, 1)");
        }

        let t_max = match (self.t_max, command) {
            (Some(t), Command::OracleCheck) if t > MAX_HORIZON => {
                bail!("--t-max {t} exceeds oracle horizon limit {MAX_HORIZON}")
            }
            (Some(t), _) => t,
            (None, Command::OracleCheck) => DEFAULT_ORACLE_HORIZON,
            (None, _) => (p.t_star() + 4.0 * p.window_scale()).ceil() as u64,
        };

        let walks = self.walks.unwrap_or(DEFAULT_WALKS);
        if walks == 0 {
            bail!("--walks must be at least 1");
        }

        let format = match (self.format, command) {
            (Some(Format::Csv), Command::Mix) => bail!("mix reports are JSON only"),
            (Some(f), _) => f,
            (None, Command::Mix) => Format::Json,
            (None, _) => Format::Csv,
        };

        if self.bounds_only && matches!(command, Command::Mix | Command::Simulate | Command::OracleCheck) {
            bail!("--bounds-only is not available for this subcommand");
        }

        Ok(RunConfig {
            command,
            n,
            k,
            t_max,
            c_grid,
            epsilons,
            bounds_only: self.bounds_only,
            stream_rows: self.stream_rows,
            walks,
            horizon: self.horizon.unwrap_or_else(|| (2.0 * p.t_star()).ceil() as u64),
            seed: self.seed.unwrap_or(0),
            mode: self.mode.unwrap_or(Mode::Lumped),
            format,
            out: self.out,
        })
    }
}

impl RunConfig {
    pub fn params(&self) -> KneserParams {
        KneserParams::new(self.n, self.k).expect("validated at resolve time")
    }

    /// Kernel storage for exact evolution: dense when it fits, streaming
    /// only when asked for.
    pub fn storage(&self) -> Result<KernelStorage> {
        let p = self.params();
        if dense_kernel_feasible(p) {
            Ok(KernelStorage::Dense)
        } else if self.stream_rows {
            Ok(KernelStorage::Streaming)
        } else {
            bail!(
                "exact mode for n = {}, k = {} needs {} kernel entries (limit {DENSE_ENTRY_LIMIT}); pass --stream-rows or --bounds-only",
                self.n,
                self.k,
                kernel_entry_count(p)
            )
        }
    }
}

/// Worker count: `KNESER_MIX_THREADS` if set to a positive integer,
/// otherwise the available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(n: u32, k: u32) -> RawConfig {
        RawConfig {
            n: Some(n),
            k: Some(k),
            ..Default::default()
        }
    }

    #[test]
    fn json_round_trip() {
        let mut r = raw(7, 3);
        r.epsilons = vec![0.1, 0.9];
        r.c_grid = Some("-1:1:0.25".into());
        r.out = Some("/tmp/x.csv".into());
        let cfg = r.resolve(Command::Window).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn zero_parameters_rejected() {
        let e = raw(0, 1).resolve(Command::Profile).unwrap_err().to_string();
        assert!(e.contains("n must be >= 1"), "{e}");
        let e = raw(3, 0).resolve(Command::Profile).unwrap_err().to_string();
        assert!(e.contains("k must be >= 1"), "{e}");
    }

    #[test]
    fn defaults() {
        let cfg = raw(2, 1).resolve(Command::Mix).unwrap();
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.epsilons, vec![DEFAULT_EPSILON]);
        assert_eq!(cfg.c_grid.len(), 13);
        let cfg = raw(2, 1).resolve(Command::OracleCheck).unwrap();
        assert_eq!(cfg.t_max, DEFAULT_ORACLE_HORIZON);
    }

    #[test]
    fn bad_flags_rejected() {
        let mut r = raw(2, 1);
        r.epsilons = vec![1.0];
        assert!(r.resolve(Command::Mix).is_err());
        let mut r = raw(2, 1);
        r.format = Some(Format::Csv);
        assert!(r.resolve(Command::Mix).is_err());
        let mut r = raw(2, 1);
        r.c_grid = Some("1:0:1".into());
        assert!(r.resolve(Command::Window).is_err());
    }
}
