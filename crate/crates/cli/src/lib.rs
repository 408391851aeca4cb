//! Command-line front end for `kneser-core`: run configuration, CSV/JSON
//! reports and thread-pool drivers.

pub mod args;
pub mod commands;
pub mod config;
pub mod parallel;
pub mod report;

pub use commands::{run, Outcome};
pub use config::{Command, Format, Mode, RawConfig, RunConfig};
