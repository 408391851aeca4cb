//! Exact and bounded mixing-time analysis for simple random walks on Kneser
//! graphs `K(2n+k, n)`.
//!
//! * [`combinatorics`]: log-domain and exact binomials, hypergeometric laws.
//! * [`model`]: graph parameters, transition spectrum, stationary laws.
//! * [`engine`]: exact evolution through intersection-size lumps, giving
//!   the exact distance profile `d(t)` and exact moments of the overlap
//!   statistic.
//! * [`bounds`]: spectral upper bounds and distinguishing-statistic lower
//!   bounds.
//! * [`analysis`]: mixing times, profiles and cutoff diagnostics.
//! * [`montecarlo`]: seeded simulation for statistical cross-checks.
//! * [`oracle`]: brute-force ground truth on tiny graphs.
//!
//! The crate is `no_std` and needs only `alloc`. The default `std` feature
//! takes float math from std; without it, `libm` is used.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod bounds;
pub mod combinatorics;
pub mod engine;
pub mod model;
pub mod montecarlo;
pub mod oracle;

pub use combinatorics::{rational_to_f64, ExactRational, HypergeometricParams, LogValue};
pub use model::{KneserParams, LumpSpec, SpectrumTable};
