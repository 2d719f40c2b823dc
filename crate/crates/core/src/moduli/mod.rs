//! Moduli sets `q = p1 p2 m` and the counting functions around them.

mod counting;
mod entropy;
mod feasibility;
mod profile;
mod reduction;

use thiserror::Error;

use crate::arith::ArithError;
use crate::autcoeffs::AutError;

pub use counting::{mobius_phi_brute, mobius_phi_convolution, selberg_delange_count, DelangeReport};
pub use entropy::{binary_entropy, binomial_entropy_bound, BinomialReport};
pub use feasibility::{
    degenerate_trend, find_schema_delta, parameter_feasibility, parameter_feasibility_scaled, schema_parameters,
    Constraint, FeasibilityReport, ScaledParameters, SchemaSearch,
};
pub use profile::{build_moduli, Member, ModuliProfile, ModuliSet, ProfileMode, Thresholds};
pub use reduction::{
    alpha_weight, classify_smooth_rough, reduction_identity_check, reduction_identity_scan, PrimeWindow,
    ReductionResidual, ReductionScan, SmoothClass,
};

#[derive(Debug, Error)]
pub enum ModuliError {
    #[error("empty moduli set ({mode:?} mode): {reason}")]
    Empty { mode: ProfileMode, reason: String },
    #[error("profile: {0}")]
    Profile(String),
    #[error("member invariant violated: {0}")]
    Invariant(String),
    #[error("{what}: size {size} exceeds budget {cap}")]
    Budget { what: &'static str, size: u64, cap: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Coefficients(#[from] AutError),
}
