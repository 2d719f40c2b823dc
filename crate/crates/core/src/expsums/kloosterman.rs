use num_complex::Complex64;

use super::{ExpsumError, TransformValue};
use crate::arith::{factor, inv_mod, is_prime, reduce_signed};
use crate::dirichlet::e_frac;

/// Largest `p^(k-1)` evaluated by the nested loop.
pub const NESTED_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KloostermanMethod {
    /// Nested loop within budget, convolution beyond.
    Auto,
    Nested,
    Convolution,
}

fn normalizer(p: u64, k: u32) -> f64 {
    (p as f64).powf((k as f64 - 1.0) / 2.0)
}

fn check(p: u64, k: u32) -> Result<(), ExpsumError> {
    if !is_prime(p) {
        return Err(ExpsumError::NotPrime(p));
    }
    if k == 0 {
        return Err(ExpsumError::Precondition("hyper-Kloosterman order must be at least 1".into()));
    }
    Ok(())
}

/// `K_k(u; p) = p^{-(k-1)/2} sum over x_1...x_k = u of e((x_1+...+x_k)/p)`.
pub fn hyper_kloosterman(u: i64, p: u64, k: u32) -> Result<Complex64, ExpsumError> {
    hyper_kloosterman_with(u, p, k, KloostermanMethod::Auto)
}

pub fn hyper_kloosterman_with(u: i64, p: u64, k: u32, method: KloostermanMethod) -> Result<Complex64, ExpsumError> {
    check(p, k)?;
    let u = reduce_signed(u as i128, p);
    if u == 0 {
        return Err(ExpsumError::Precondition(format!("{u} is not a unit mod {p}")));
    }
    let cost = (p as u128).pow(k - 1);
    let nested_ok = cost <= NESTED_BUDGET as u128;
    match method {
        KloostermanMethod::Nested if !nested_ok => Err(ExpsumError::Budget {
            what: "hyper_kloosterman nested loop",
            size: cost.min(u64::MAX as u128) as u64,
            cap: NESTED_BUDGET,
        }),
        KloostermanMethod::Nested => Ok(nested(u, p, k)),
        KloostermanMethod::Auto if nested_ok => Ok(nested(u, p, k)),
        _ => Ok(convolution(p, k)[u as usize]),
    }
}

fn nested(u: u64, p: u64, k: u32) -> Complex64 {
    let phases: Vec<Complex64> = (0..p).map(|x| e_frac(x as i128, p)).collect();
    let inverse: Vec<u64> = (0..p)
        .map(|x| if x == 0 { 0 } else { inv_mod(x as i64, p).unwrap().value() })
        .collect();
    // free variables x_1..x_{k-1}; x_k = u / (x_1 ... x_{k-1})
    fn walk(depth: u32, prod: u64, sum: u64, u: u64, p: u64, ph: &[Complex64], inv: &[u64]) -> Complex64 {
        if depth == 0 {
            let last = (u as u128 * inv[prod as usize] as u128 % p as u128) as u64;
            return ph[((sum + last) % p) as usize];
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 1..p {
            acc += walk(depth - 1, prod * x % p, (sum + x) % p, u, p, ph, inv);
        }
        acc
    }
    walk(k - 1, 1, 0, u, p, &phases, &inverse) / normalizer(p, k)
}

/// Unnormalized sums `S_j(a) = sum over x_1...x_j = a of e(sum x / p)` built by
/// multiplicative convolution, returned normalized for every unit `a`.
fn convolution(p: u64, k: u32) -> Vec<Complex64> {
    let n = p as usize;
    let phases: Vec<Complex64> = (0..p).map(|x| e_frac(x as i128, p)).collect();
    let inverse: Vec<usize> = (0..p)
        .map(|x| if x == 0 { 0 } else { inv_mod(x as i64, p).unwrap().value() as usize })
        .collect();
    let mut s = phases.clone();
    s[0] = Complex64::new(0.0, 0.0);
    for _ in 1..k {
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for (a, slot) in next.iter_mut().enumerate().skip(1) {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 1..n {
                acc += s[a * inverse[x] % n] * phases[x];
            }
            *slot = acc;
        }
        s = next;
    }
    let norm = normalizer(p, k);
    s.iter().map(|z| z / norm).collect()
}

/// `K_k(a; p)` for every residue `a` in `0..p` (zero at `a = 0`).
pub fn hyper_kloosterman_all(p: u64, k: u32) -> Result<Vec<Complex64>, ExpsumError> {
    check(p, k)?;
    Ok(convolution(p, k))
}

/// `T_k(v; p) = ((p-1)/p) K_k(v^-1; p) - (-1)^k p^{-(k+1)/2}`.
pub fn t_k_via_kloosterman(v: i64, p: u64, k: u32) -> Result<TransformValue, ExpsumError> {
    check(p, k)?;
    let modulus = factor(p);
    let value = match inv_mod(v, p) {
        Err(_) => Complex64::new(0.0, 0.0),
        Ok(v_inv) => {
            let kl = hyper_kloosterman(v_inv.value() as i64, p, k)?;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            kl * ((p - 1) as f64 / p as f64) - sign / (p as f64).powf((k as f64 + 1.0) / 2.0)
        }
    };
    Ok(TransformValue { value, modulus, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsums::t_k_brute;

    #[test]
    fn classical_kloosterman_mod_5() {
        let v = hyper_kloosterman(1, 5, 2).unwrap();
        let expect = (2.0 * (4.0 * std::f64::consts::PI / 5.0).cos() + 2.0) / 5f64.sqrt();
        assert!((v.re - expect).abs() < 1e-12 && v.im.abs() < 1e-12);
        assert!((v.re - 0.1708).abs() < 1e-4);
    }

    #[test]
    fn prime_two_is_a_single_term() {
        for k in 2..=5u32 {
            let v = hyper_kloosterman(1, 2, k).unwrap();
            let expect = if k % 2 == 0 { 1.0 } else { -1.0 } / 2f64.powf((k as f64 - 1.0) / 2.0);
            assert!((v.re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn methods_agree() {
        for p in [3u64, 7, 11, 13] {
            for k in 2..=4 {
                let all = hyper_kloosterman_all(p, k).unwrap();
                for u in 1..p {
                    let a = hyper_kloosterman_with(u as i64, p, k, KloostermanMethod::Nested).unwrap();
                    assert!((a - all[u as usize]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn inversion_formula_matches_enumeration() {
        for (v, p, k) in [(1i64, 5u64, 4u32), (2, 7, 2), (1, 7, 4), (3, 11, 3), (5, 13, 5)] {
            let a = t_k_via_kloosterman(v, p, k).unwrap().value;
            let b = t_k_brute(v, &factor(p), k).unwrap().value;
            assert!((a - b).norm() < 1e-9, "v={v} p={p} k={k}");
        }
        assert_eq!(t_k_via_kloosterman(7, 7, 4).unwrap().value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn nested_budget_is_enforced() {
        let r = hyper_kloosterman_with(1, 1009, 4, KloostermanMethod::Nested);
        assert!(matches!(r, Err(ExpsumError::Budget { .. })));
        assert!(hyper_kloosterman(1, 1009, 3).is_ok());
    }
}
