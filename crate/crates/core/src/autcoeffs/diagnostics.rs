use num_complex::Complex64;
use serde::Serialize;

use super::provider::CoeffProvider;
use super::AutError;
use crate::arith::{gcd, primes_in};

const ENVELOPE_CONSTANT: f64 = 100.0;

#[derive(Debug, Clone, Serialize)]
pub struct SwReport {
    pub sum: (f64, f64),
    pub abs: f64,
    pub primes: usize,
    /// `|sum|` divided by the number of primes (0 when there are none).
    pub ratio: f64,
}

/// `sum of lambda(p) p^{it}` over primes `p` in `[x, 2x)` with `p = a (mod q)`.
pub fn sw_prime_sum(provider: &CoeffProvider, x: u64, q: u64, a: i64, t: f64) -> Result<SwReport, AutError> {
    if q == 0 || gcd(crate::arith::reduce_signed(a as i128, q), q) != 1 {
        return Err(AutError::Validation(format!("residue {a} is not a unit mod {q}")));
    }
    let target = crate::arith::reduce_signed(a as i128, q);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut primes = 0usize;
    for p in primes_in(x, 2 * x) {
        if p % q != target % q {
            continue;
        }
        let phase = Complex64::from_polar(1.0, t * (p as f64).ln());
        sum += provider.lambda_prime_power(p, 1)? * phase;
        primes += 1;
    }
    Ok(SwReport {
        sum: (sum.re, sum.im),
        abs: sum.norm(),
        primes,
        ratio: if primes > 0 { sum.norm() / primes as f64 } else { 0.0 },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RankinEntry {
    pub value: f64,
    pub envelope: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankinReport {
    pub p_min: u64,
    pub n_max: u64,
    pub k: u32,
    /// `sum over P <= p <= N of |lambda(p^k)|^2 / p^k` against `P^{-1/11} log N`.
    pub prime_power: RankinEntry,
    /// `sum over P <= p <= N of |lambda(p)|^4 / p^2` against `P^{-2/11} log N`.
    pub fourth_moment: RankinEntry,
    /// `sum over 2 <= n <= N of |lambda(n)|^2 / n` against `log N`.
    pub second_moment: RankinEntry,
}

/// Partial sums against their envelopes with constant 100.
pub fn rankin_diagnostics(provider: &CoeffProvider, p_min: u64, n_max: u64, k: u32) -> Result<RankinReport, AutError> {
    let log_n = (n_max.max(2) as f64).ln();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for p in primes_in(p_min.max(2), n_max.saturating_add(1)) {
        let pf = p as f64;
        s1 += provider.lambda_prime_power(p, k)?.norm_sqr() / pf.powi(k as i32);
        s2 += provider.lambda_prime_power(p, 1)?.norm_sqr().powi(2) / (pf * pf);
    }
    let s3 = if n_max >= 2 {
        let table = provider.lambda_table(n_max as usize)?;
        table.iter().enumerate().skip(2).map(|(n, l)| l.norm_sqr() / n as f64).sum()
    } else {
        0.0
    };
    let pm = p_min.max(1) as f64;
    let entry = |value: f64, shape: f64| {
        let envelope = ENVELOPE_CONSTANT * shape;
        RankinEntry { value, envelope, within: value <= envelope }
    };
    Ok(RankinReport {
        p_min,
        n_max,
        k,
        prime_power: entry(s1, pm.powf(-1.0 / 11.0) * log_n),
        fourth_moment: entry(s2, pm.powf(-2.0 / 11.0) * log_n),
        second_moment: entry(s3, log_n),
    })
}
