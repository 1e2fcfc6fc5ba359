//! Precision management, log-domain values and cancellation-aware series summation.
//!
//! Every other module evaluates through the types defined here:
//!
//! - [`PrecisionContext`]: working bits, target relative tolerance and the escalation cap.
//! - [`HpReal`] / [`HpComplex`]: MPFR/MPC scalars with a `±2^30` binary exponent range.
//! - [`LogForm`]: `(ln |x|, arg x)` pairs for values whose magnitude is only ever
//!   handled through its logarithm.
//! - [`sum_series`]: adaptive summation that re-evaluates at doubled precision until two
//!   successive results agree.

mod context;
mod logform;
mod scalar;
mod summation;

pub use context::PrecisionContext;
pub use logform::{logform_linear_combination, LogForm};
pub use scalar::{approx_ln_abs, approx_ln_abs_real, complex, pi, real, HpComplex, HpReal};
pub use summation::{sum_series, sum_series_with_floor, SeriesTerm, Summation};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("invalid precision context: {0}")]
    InvalidContext(String),
    #[error("precision exhausted: {needed} bits needed, cap is {max} bits")]
    PrecisionExhausted { needed: u32, max: u32 },
    #[error("series tail did not fall below tolerance within {terms} terms")]
    NonDecayingTail { terms: usize },
    #[error("total cancellation: result is below the representable gap")]
    TotalCancellation,
    #[error("empty linear combination")]
    EmptyCombination,
}
