use num_complex::Complex64;
use serde::Serialize;

use super::ExpsumError;
use crate::arith::{gcd, inv_mod};
use crate::dirichlet::e_frac;

const BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct BilinearReport {
    pub sum: (f64, f64),
    pub abs: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub terms: u64,
}

/// `sum alpha(m) beta(n) e(l m^-1 / n) F(m, n)` over `m` in `[M, 2M)`, `n` in
/// `[N, 2N)` with `gcd(m, n) = 1`. `alpha[i]` is the weight at `M + i`.
pub fn dfi_bilinear(
    m_start: u64,
    alpha: &[Complex64],
    n_start: u64,
    beta: &[Complex64],
    ell: i64,
    weight: impl Fn(u64, u64) -> f64,
) -> Result<BilinearReport, ExpsumError> {
    if ell == 0 {
        return Err(ExpsumError::Precondition("l must be nonzero".into()));
    }
    if m_start == 0 || n_start == 0 {
        return Err(ExpsumError::Precondition("ranges must start at a positive integer".into()));
    }
    let size = alpha.len() as u64 * beta.len() as u64;
    if size > BUDGET {
        return Err(ExpsumError::Budget { what: "dfi_bilinear", size, cap: BUDGET });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut terms = 0u64;
    for (j, &b) in beta.iter().enumerate() {
        let n = n_start + j as u64;
        for (i, &a) in alpha.iter().enumerate() {
            let m = m_start + i as u64;
            if gcd(m, n) != 1 {
                continue;
            }
            let m_inv = inv_mod(m as i64, n)?.value();
            acc += a * b * e_frac(ell as i128 * m_inv as i128, n) * weight(m, n);
            terms += 1;
        }
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (mm, nn) = (m_start as f64, n_start as f64);
    let envelope = norm(alpha) * norm(beta) * (ell.unsigned_abs() as f64 + mm * nn).powf(3.0 / 8.0) * (mm + nn).powf(11.0 / 48.0);
    Ok(BilinearReport {
        sum: (acc.re, acc.im),
        abs: acc.norm(),
        envelope,
        ratio: if envelope > 0.0 { acc.norm() / envelope } else { 0.0 },
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_term() {
        let one = [Complex64::new(1.0, 0.0)];
        let r = dfi_bilinear(3, &one, 7, &one, 2, |_, _| 0.5).unwrap();
        assert!((r.abs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matches_independent_double_loop() {
        let ones = vec![Complex64::new(1.0, 0.0); 10];
        let r = dfi_bilinear(10, &ones, 10, &ones, 1, |_, _| 1.0).unwrap();
        let mut expect = Complex64::new(0.0, 0.0);
        for m in 10u64..20 {
            for n in 10u64..20 {
                if gcd(m, n) == 1 {
                    let inv = (1..n).find(|x| x * m % n == 1).unwrap();
                    let t = std::f64::consts::TAU * inv as f64 / n as f64;
                    expect += Complex64::new(t.cos(), t.sin());
                }
            }
        }
        assert!((Complex64::new(r.sum.0, r.sum.1) - expect).norm() < 1e-10);
    }

    #[test]
    fn random_signs_stay_below_envelope() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut signs = || -> Vec<Complex64> {
            (0..100).map(|_| Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0)).collect()
        };
        let (a, b) = (signs(), signs());
        let r = dfi_bilinear(100, &a, 100, &b, 3, |_, _| 1.0).unwrap();
        assert!(r.ratio < 1.0);
    }
}
