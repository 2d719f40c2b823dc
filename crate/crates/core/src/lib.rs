//! Character sums, twisted hyper-Kloosterman transforms and twisted central
//! L-values for degree-four automorphic L-functions.
pub mod arith;
pub mod autcoeffs;
pub mod census;
pub mod dirichlet;
pub mod expsums;
pub mod lfun;
pub mod moduli;
pub mod verify;

pub use arith::{factor, factorize, Factored, Residue};
pub use autcoeffs::CoeffProvider;
pub use dirichlet::{Character, CharacterGroup};
pub use num_complex::Complex64;
