use serde::Serialize;

use super::ModuliError;
use crate::arith::{FactorSieve, Factored};

/// `c(n) = sum over n = cd of mu(c) phi(d)`; multiplicative with
/// `c(p) = p - 2` and `c(p^e) = p^(e-2) (p-1)^2` for `e >= 2`.
pub fn mobius_phi_convolution(n: &Factored) -> i64 {
    n.factors()
        .iter()
        .map(|&(p, e)| {
            let p = p as i64;
            if e == 1 {
                p - 2
            } else {
                p.pow(e - 2) * (p - 1) * (p - 1)
            }
        })
        .product()
}

/// Divisor-sum evaluation of the same convolution.
pub fn mobius_phi_brute(n: &Factored) -> i64 {
    n.factored_divisors()
        .into_iter()
        .map(|d| {
            let c = n.value() / d.value();
            crate::arith::mobius(c) * d.phi() as i64
        })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct DelangeReport {
    pub m: u64,
    pub max_omega: u32,
    pub w: u64,
    /// `sum of mu^2(m) c(m)` over squarefree `m` in `[M, 2M)` with at most
    /// `max_omega` prime factors, all greater than `w`.
    pub exact: i128,
    pub terms: u64,
    /// `-1 + d + d log(1/d)` with `d = max_omega / log log M`.
    pub predicted_exponent: f64,
    /// `log(exact / M^2) / log log M`, when defined.
    pub observed_exponent: Option<f64>,
}

const DELANGE_BUDGET: u64 = 10_000_000;

pub fn selberg_delange_count(m: u64, max_omega: u32, w: u64) -> Result<DelangeReport, ModuliError> {
    if m == 0 {
        return Err(ModuliError::Profile("M must be positive".into()));
    }
    if m > DELANGE_BUDGET {
        return Err(ModuliError::Budget { what: "selberg_delange_count", size: m, cap: DELANGE_BUDGET });
    }
    let hi = 2 * m;
    let sieve = FactorSieve::new(hi as usize);
    let mut exact: i128 = 0;
    let mut terms = 0u64;
    'outer: for n in m..hi {
        let mut rest = n;
        let mut omega = 0u32;
        let mut value: i128 = 1;
        while rest > 1 {
            let p = sieve.smallest_prime_factor(rest as usize);
            rest /= p;
            if rest % p == 0 || p <= w {
                continue 'outer;
            }
            omega += 1;
            if omega > max_omega {
                continue 'outer;
            }
            value *= p as i128 - 2;
        }
        exact += value;
        terms += 1;
    }
    let ll = (m.max(3) as f64).ln().ln();
    let d = (max_omega as f64 / ll).min(1.0);
    let predicted_exponent = if d > 0.0 { -1.0 + d + d * (1.0 / d).ln() } else { -1.0 };
    let observed_exponent =
        (exact > 0 && ll > 0.0).then(|| ((exact as f64) / (m as f64).powi(2)).ln() / ll);
    Ok(DelangeReport { m, max_omega, w, exact, terms, predicted_exponent, observed_exponent })
}
