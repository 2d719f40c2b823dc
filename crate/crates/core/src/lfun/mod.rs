//! Root numbers, smoothed cutoff weights and central values of twisted
//! degree-four L-functions, plus the dyadic-band decomposition of their
//! character averages.

mod afe;
mod central;
mod gamma;
mod pieces;
mod window;

use thiserror::Error;

use crate::autcoeffs::AutError;
use crate::dirichlet::DirichletError;

pub use afe::{afe_weight, AfeWeight, MellinKernel, WeightRole};
pub use central::{
    l_central, lvalues_for_modulus, root_number, AfeConfig, CoefficientTable, LStatus, TwistedLValue,
    INDETERMINATE_THRESHOLD, NONZERO_THRESHOLD,
};
pub use gamma::{ln_gamma, ln_gamma_r};
pub use pieces::{
    band_scales, dual_piece, dual_piece_direct, forward_piece, forward_piece_direct, PieceValue,
};
pub use window::{partition_check, PartitionReport, SmoothWindow, WindowNorms};

#[derive(Debug, Error)]
pub enum LfunError {
    #[error("character {id} mod {q} is not primitive")]
    NotPrimitive { q: u64, id: usize },
    #[error("modulus {q} is not coprime to the conductor {conductor}")]
    Ramified { q: u64, conductor: u64 },
    #[error("quadrature on Re s = {sigma} did not converge")]
    Quadrature { sigma: f64 },
    #[error("need coefficients up to {needed}, have {available}")]
    Coefficients { needed: usize, available: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Coefficient(#[from] AutError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
}
