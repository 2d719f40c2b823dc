use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::ModuliError;

const MAX_N: u64 = 200;

#[derive(Debug, Clone, Serialize)]
pub struct BinomialReport {
    pub n: u64,
    pub k: u64,
    /// Exact `sum_{j <= k} C(n, j)` in decimal.
    pub exact: String,
    pub exact_f64: f64,
    /// `exp(n H(k/n))`.
    pub bound: f64,
    pub holds: bool,
}

/// `H(p) = p log(1/p) + (1-p) log(1/(1-p))`, with `H(0) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    term(p) + term(1.0 - p)
}

pub fn binomial_entropy_bound(n: u64, k: u64) -> Result<BinomialReport, ModuliError> {
    if n > MAX_N {
        return Err(ModuliError::Budget { what: "binomial_entropy_bound", size: n, cap: MAX_N });
    }
    if 2 * k > n {
        return Err(ModuliError::Profile(format!("k = {k} exceeds n/2 = {}", n as f64 / 2.0)));
    }
    let mut term = BigUint::one();
    let mut exact = BigUint::one();
    for j in 1..=k {
        term = term * (n - j + 1) / j;
        exact += &term;
    }
    let bound = if n == 0 { 1.0 } else { (n as f64 * binary_entropy(k as f64 / n as f64)).exp() };
    let exact_f64 = exact.to_f64().unwrap_or(f64::INFINITY);
    Ok(BinomialReport { n, k, exact: exact.to_string(), exact_f64, bound, holds: exact_f64 <= bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = binomial_entropy_bound(30, 3).unwrap();
        assert_eq!(r.exact, "4526");
        assert!(r.holds && (r.bound - 1.72e4).abs() < 0.01e4);
        let z = binomial_entropy_bound(10, 0).unwrap();
        assert_eq!(z.exact, "1");
        assert!(z.holds && z.bound >= 1.0);
        let half = binomial_entropy_bound(100, 50).unwrap();
        assert!(half.holds);
        assert!(binomial_entropy_bound(10, 6).is_err());
        assert!(binomial_entropy_bound(201, 3).is_err());
    }
}
