use num_complex::Complex64;
use serde::Serialize;

use super::ModuliError;
use crate::arith::{factorize, Factored};
use crate::autcoeffs::CoeffProvider;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothClass {
    /// Some prime factor lies in `[y_lo, y_hi]`.
    WindowPrime,
    /// No window prime, but the `y_lo`-smooth part exceeds the threshold.
    HeavySmooth,
    /// No window prime and a small smooth part.
    Exceptional,
}

/// Tags `n` by its prime factors relative to the window `[y_lo, y_hi]`.
pub fn classify_smooth_rough(n: &Factored, y_lo: u64, y_hi: u64, u_threshold: u64) -> SmoothClass {
    assert!(y_lo < y_hi, "window must be nonempty");
    if n.primes().any(|p| (y_lo..=y_hi).contains(&p)) {
        return SmoothClass::WindowPrime;
    }
    let smooth: u128 = n
        .factors()
        .iter()
        .filter(|&&(p, _)| p < y_lo)
        .map(|&(p, e)| (p as u128).pow(e))
        .product();
    if smooth > u_threshold as u128 {
        SmoothClass::HeavySmooth
    } else {
        SmoothClass::Exceptional
    }
}

/// Primes in a closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimeWindow {
    pub lo: u64,
    pub hi: u64,
}

impl PrimeWindow {
    pub const DEFAULT: PrimeWindow = PrimeWindow { lo: 5, hi: 200 };

    pub fn contains(&self, p: u64) -> bool {
        (self.lo..=self.hi).contains(&p)
    }

    /// `mu^2_P(n) = 0` iff some window prime divides `n` twice.
    pub fn squarefree_part_ok(&self, n: &Factored) -> bool {
        n.factors().iter().all(|&(p, e)| e == 1 || !self.contains(p))
    }

    /// `omega(n; P)`.
    pub fn omega(&self, n: &Factored) -> usize {
        n.primes().filter(|&p| self.contains(p)).count()
    }
}

/// `alpha(m) = lambda(m) mu^2_P(m) / (1 + omega(m; P))`.
pub fn alpha_weight(provider: &CoeffProvider, m: u64, window: PrimeWindow) -> Result<Complex64, ModuliError> {
    let f = factorize(m)?;
    alpha_from(&f, provider.lambda_at(m)?, window)
}

fn alpha_from(f: &Factored, lambda: Complex64, window: PrimeWindow) -> Result<Complex64, ModuliError> {
    if !window.squarefree_part_ok(f) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(lambda / (1.0 + window.omega(f) as f64))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReductionResidual {
    pub n: u64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// `lambda(n) mu^2_P(n) 1[n has a window prime]` against
/// `sum over p in P, p || n of lambda(p) alpha(n / p)`.
pub fn reduction_identity_check(provider: &CoeffProvider, n: u64, window: PrimeWindow) -> Result<ReductionResidual, ModuliError> {
    let lookup = |m: u64| provider.lambda_at(m).map_err(ModuliError::from);
    reduction_with(n, window, lookup)
}

fn reduction_with(n: u64, window: PrimeWindow, lambda: impl Fn(u64) -> Result<Complex64, ModuliError>) -> Result<ReductionResidual, ModuliError> {
    let f = factorize(n)?;
    let has_window_prime = f.primes().any(|p| window.contains(p));
    let lhs = if has_window_prime && window.squarefree_part_ok(&f) { lambda(n)? } else { Complex64::new(0.0, 0.0) };
    let mut rhs = Complex64::new(0.0, 0.0);
    for &(p, e) in f.factors() {
        if !window.contains(p) || e != 1 {
            continue;
        }
        let m = n / p;
        let mf = factorize(m)?;
        rhs += lambda(p)? * alpha_from(&mf, lambda(m)?, window)?;
    }
    Ok(ReductionResidual { n, lhs, rhs, residual: (lhs - rhs).norm() / (1.0 + lhs.norm()) })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReductionScan {
    pub n_max: u64,
    pub window: PrimeWindow,
    pub max_residual: f64,
    pub worst_n: u64,
}

/// Reduction identity for every `n <= n_max`, using one coefficient table.
pub fn reduction_identity_scan(provider: &CoeffProvider, n_max: u64, window: PrimeWindow) -> Result<ReductionScan, ModuliError> {
    let table = provider.lambda_table(n_max as usize)?;
    let lookup = |m: u64| Ok(table[m as usize]);
    let mut worst = (0.0, 1);
    for n in 1..=n_max {
        let r = reduction_with(n, window, lookup)?;
        if r.residual > worst.0 {
            worst = (r.residual, n);
        }
    }
    Ok(ReductionScan { n_max, window, max_residual: worst.0, worst_n: worst.1 })
}
