//! High-precision evaluation of confluent q-series and their `q -> 1` asymptotics.
//!
//! The crate is layered bottom-up:
//!
//! - [`numeric`]: precision contexts, log-domain values, adaptive summation.
//! - [`qkernel`]: q-Pochhammer symbols, q-Gamma, Euler Gamma, Dedekind eta and the
//!   asymptotic main terms of `(q;q)_inf` and `(q^x;q)_inf`.
//! - [`theta`]: Jacobi theta functions by series, triple product and modular transform.
//! - [`series`]: the master `g`/`h` series and the named families built on them.
//! - [`asymptotics`]: admissible scales and the scaled asymptotic main terms.

pub mod asymptotics;
pub mod error;
pub mod numeric;
pub mod qkernel;
pub mod series;
pub mod theta;
mod variant;

pub use error::{Error, Result};
pub use variant::FormulaVariant;
