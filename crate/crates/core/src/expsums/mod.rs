//! Complete exponential sums built from Gauss sums of primitive characters.
//!
//! `T_k(l; q)` averages `tau(chi)^k chi(l)` over primitive characters and is
//! evaluated three ways: by direct enumeration, by the twisted product rule
//! over coprime splits, and at primes through hyper-Kloosterman sums. The
//! paired sum `K_k` is evaluated by brute force over units and in its
//! factored form.

mod bilinear;
mod kloosterman;
mod paired;
mod poisson;
mod transform;

use thiserror::Error;

use crate::arith::ArithError;
use crate::dirichlet::DirichletError;

pub use bilinear::{dfi_bilinear, BilinearReport};
pub use kloosterman::{
    hyper_kloosterman, hyper_kloosterman_all, hyper_kloosterman_with, t_k_via_kloosterman, KloostermanMethod,
    NESTED_BUDGET,
};
pub use paired::{kk_brute, kk_diagonal, kk_diagonal_closed_form, kk_factored, KKParams, KK_BRUTE_BUDGET};
pub use poisson::{poisson_check, PoissonReport};
pub use transform::{
    e_pi_transform, e_pi_transform_character_side, e_pi_transform_formula, local_tk, t_k_brute, t_k_factored, t_k_fast, tk_table,
    tk_table_by_characters, TransformValue, T_BRUTE_BUDGET,
};

#[derive(Debug, Error)]
pub enum ExpsumError {
    #[error("moduli {r} and {s} are not coprime")]
    NotCoprime { r: u64, s: u64 },
    #[error("modulus {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{what}: size {size} exceeds budget {cap}")]
    Budget { what: &'static str, size: u64, cap: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{what}: evaluations disagree by {discrepancy:.3e} (tolerance {tolerance:.1e})")]
    Consistency { what: &'static str, discrepancy: f64, tolerance: f64 },
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("root number: {0}")]
    RootNumber(String),
}
