//! Convergence studies for scaled q-series asymptotics.
//!
//! The harness compares exact values of the master series and their named
//! specialisations against closed-form approximants along admissible scales, fits the
//! observed decay rates, sweeps the remainder bounds of the theta reductions, and runs
//! identity and determinism suites. Every study is described by a flat key-value
//! config (see [`config`]) so that each check is reproducible from a committed file.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod emit;
pub mod error;
pub mod render;
pub mod study;
pub mod suites;

pub use error::{HarnessError, Result};

/// Process exit codes.
pub mod exit {
    pub const PASSED: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const INVALID_CONFIG: u8 = 2;
    pub const PRECISION_EXHAUSTED: u8 = 3;

    /// Share of rows above which a plan counts as precision-exhausted.
    pub const EXHAUSTED_LIMIT: f64 = 0.10;
}
