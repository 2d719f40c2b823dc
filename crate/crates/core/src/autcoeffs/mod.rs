//! Normalized coefficients of degree-four automorphic L-functions.
//!
//! Concrete sources are the symmetric cube of a GL(2) eigenform and the
//! Rankin-Selberg product of two, both driven by Ramanujan's `tau` from an
//! in-repo q-expansion, plus a line-based file format.

mod diagnostics;
mod file;
mod provider;
mod ramanujan;
mod satake;

use thiserror::Error;

use crate::arith::ArithError;

pub use diagnostics::{rankin_diagnostics, sw_prime_sum, RankinReport, SwReport};
pub use file::{file_provider, parse_provider, FileMode};
pub use provider::{
    rankin_delta_delta_e4, rankin_provider, sym3_delta, sym3_provider, CentralCharacter, CoeffProvider, Gl2Form,
    PrimeData,
};
pub use ramanujan::{delta_e4_exact, tau_exact, tau_limit, tau_naive, tau_normalized, DELTA_E4_LIMIT};
pub use satake::{
    elementary_from_lambdas, lambdas_from_power_sums, power_sums_from_lambdas, quartic_roots, SatakeClass,
    SatakeLocal, SatakeTag,
};

#[derive(Debug, Error)]
pub enum AutError {
    #[error("no coefficient data for p = {prime} (exponent {exponent})")]
    Gap { prime: u64, exponent: u32 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid data: {0}")]
    Validation(String),
    #[error("power sum at p = {prime}, l = {exponent}: Satake and Newton values differ by {discrepancy:.3e}")]
    Consistency { prime: u64, exponent: u32, discrepancy: f64 },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Arith(#[from] ArithError),
}
