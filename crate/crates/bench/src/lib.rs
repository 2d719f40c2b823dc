//! Fixtures shared by the criterion benches.

use charsum_core::arith::factor;
use charsum_core::Factored;

/// Squarefree moduli of increasing size used across kernels.
pub fn squarefree_moduli() -> Vec<Factored> {
    [105u64, 385, 1001, 5005].into_iter().map(factor).collect()
}
