//! Command-line flags.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Command, Format, Mode, RawConfig};

#[derive(Debug, Parser)]
#[command(
    name = "kneser-mix",
    version,
    about = "Mixing-time analysis of random walks on Kneser graphs K(2n+k, n)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,

    /// Subset size n >= 1.
    #[arg(long = "n", global = true)]
    pub n: Option<u32>,

    /// Excess k >= 1; the ground set has 2n+k elements.
    #[arg(long = "k", global = true)]
    pub k: Option<u32>,

    /// Last time step of a profile (oracle-check: comparison horizon).
    #[arg(long, global = true)]
    pub t_max: Option<u64>,

    /// Window offsets as a:b:step, probed at floor(t* + c n/k).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c_grid: Option<String>,

    /// Mixing threshold; repeatable.
    #[arg(long = "eps", global = true)]
    pub eps: Vec<f64>,

    /// Skip exact evolution; report closed-form bounds only.
    #[arg(long, global = true)]
    pub bounds_only: bool,

    /// Recompute kernel rows on every step instead of storing them.
    #[arg(long, global = true)]
    pub stream_rows: bool,

    #[arg(long, global = true)]
    pub walks: Option<u64>,

    /// Simulation horizon; defaults to ceil(2 t*).
    #[arg(long, global = true)]
    pub horizon: Option<u64>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Sub {
    /// Per-time table of d(t), bounds and moments of the overlap statistic.
    Profile,
    /// Mixing times, t*, cutoff ratio and window probe (JSON).
    Mix,
    /// d(t) and bounds at t = floor(t* + c n/k) over a c-grid.
    Window,
    /// Monte Carlo moments of the overlap statistic against exact values.
    Simulate,
    /// Brute-force cross-check on a small graph.
    OracleCheck,
    /// Transition eigenvalues and multiplicities.
    Spectrum,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ModeArg {
    Explicit,
    Lumped,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl Cli {
    pub fn command(&self) -> Command {
        match self.command {
            Sub::Profile => Command::Profile,
            Sub::Mix => Command::Mix,
            Sub::Window => Command::Window,
            Sub::Simulate => Command::Simulate,
            Sub::OracleCheck => Command::OracleCheck,
            Sub::Spectrum => Command::Spectrum,
        }
    }

    pub fn raw(self) -> RawConfig {
        RawConfig {
            n: self.n,
            k: self.k,
            t_max: self.t_max,
            c_grid: self.c_grid,
            epsilons: self.eps,
            bounds_only: self.bounds_only,
            stream_rows: self.stream_rows,
            walks: self.walks,
            horizon: self.horizon,
            seed: self.seed,
            mode: self.mode.map(|m| match m {
                ModeArg::Explicit => Mode::Explicit,
                ModeArg::Lumped => Mode::Lumped,
            }),
            format: self.format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            }),
            out: self.out,
        }
    }
}
