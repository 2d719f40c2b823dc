use num_complex::Complex64;

use super::transform::{t_k_fast, tk_table_by_characters};
use super::ExpsumError;
use crate::arith::{gcd, gcd_signed, inv_mod, pow_mod, reduce_signed, units, Factored};
use crate::dirichlet::{e_frac, CharacterGroup};

/// Largest `r s1 s2` accepted by [`kk_brute`].
pub const KK_BRUTE_BUDGET: u64 = 100_000;

/// Arguments of `K_k(v1, v2, l; r, s1, s2)` with the derived split
/// `d = gcd(s1, s2)`, `s_i = d s_i*`.
#[derive(Debug, Clone, PartialEq)]
pub struct KKParams {
    pub v1: i64,
    pub v2: i64,
    pub ell: i64,
    pub r: Factored,
    pub s1: Factored,
    pub s2: Factored,
    pub d: Factored,
    pub s1_star: Factored,
    pub s2_star: Factored,
}

impl KKParams {
    pub fn new(v1: i64, v2: i64, ell: i64, r: Factored, s1: Factored, s2: Factored) -> Result<Self, ExpsumError> {
        for m in [&r, &s1, &s2] {
            if !m.is_squarefree() {
                return Err(ExpsumError::NotSquarefree(m.value()));
            }
        }
        if gcd(r.value(), s1.value()) != 1 {
            return Err(ExpsumError::NotCoprime { r: r.value(), s: s1.value() });
        }
        if gcd(r.value(), s2.value()) != 1 {
            return Err(ExpsumError::NotCoprime { r: r.value(), s: s2.value() });
        }
        let (d, s1_star) = s1.split_by(s2.value());
        let (_, s2_star) = s2.split_by(s1.value());
        Ok(KKParams { v1, v2, ell, r, s1, s2, d, s1_star, s2_star })
    }

    pub fn total_modulus(&self) -> u64 {
        self.r.value() * self.s1.value() * self.s2.value()
    }
}

/// `(1/sqrt(R)) sum over units x mod R of T(v1 x; r s1) T(v2 x; r s2) e(l x / R)`
/// with `R = r s1 s2`; both `T` tables come from character enumeration.
pub fn kk_brute(params: &KKParams, k: u32) -> Result<Complex64, ExpsumError> {
    let big_r = params.total_modulus();
    if big_r > KK_BRUTE_BUDGET {
        return Err(ExpsumError::Budget { what: "kk_brute", size: big_r, cap: KK_BRUTE_BUDGET });
    }
    let q1 = params.r.mul(&params.s1);
    let q2 = params.r.mul(&params.s2);
    let t1 = tk_table_by_characters(&*CharacterGroup::new(&q1)?, k);
    let t2 = if q2 == q1 { t1.clone() } else { tk_table_by_characters(&*CharacterGroup::new(&q2)?, k) };
    let full = q1.mul(&params.s2);
    let (m1, m2) = (q1.value(), q2.value());
    let mut acc = Complex64::new(0.0, 0.0);
    for x in units(&full) {
        let x = x.value() as i128;
        let a = t1[reduce_signed(params.v1 as i128 * x, m1) as usize];
        let b = t2[reduce_signed(params.v2 as i128 * x, m2) as usize];
        acc += a * b * e_frac(params.ell as i128 * x, big_r);
    }
    Ok(acc / (big_r as f64).sqrt())
}

fn mod_mul(vals: &[u64], m: u64) -> u64 {
    vals.iter().fold(1 % m, |acc, &v| (acc as u128 * (v % m) as u128 % m as u128) as u64)
}

/// The factored evaluation: zero unless `d | l` and `gcd(l, s1* s2*) = 1`,
/// otherwise `sqrt(d) T_{k+1}(..; s1*) T_{k+1}(..; s2*) K_k(..; r d, 1, 1)`.
pub fn kk_factored(params: &KKParams, k: u32) -> Result<Complex64, ExpsumError> {
    let big_r = params.total_modulus();
    if gcd_signed(params.v1, big_r) != 1 || gcd_signed(params.v2, big_r) != 1 {
        return Err(ExpsumError::Precondition(format!(
            "v1={} and v2={} must be units modulo {big_r}",
            params.v1, params.v2
        )));
    }
    let (d, s1s, s2s) = (params.d.value(), params.s1_star.value(), params.s2_star.value());
    let r = params.r.value();
    let ell = params.ell;
    if reduce_signed(ell as i128, d) != 0 || gcd_signed(ell, s1s * s2s) != 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k1 = k as u64 + 1;
    let factor_for = |v: i64, other_star: u64, modulus: u64| -> i64 {
        if modulus == 1 {
            return 0;
        }
        let ell_inv = inv_mod(ell, modulus).expect("l is a unit mod s_i*").value();
        let v = reduce_signed(v as i128, modulus);
        let parts = [v, ell_inv, other_star, pow_mod(r % modulus, k1, modulus), pow_mod(d % modulus, k1 + 1, modulus)];
        mod_mul(&parts, modulus) as i64
    };
    let a1 = factor_for(params.v1, s2s, s1s);
    let a2 = factor_for(params.v2, s1s, s2s);
    let t1 = t_k_fast(a1, &params.s1_star, k + 1);
    let t2 = t_k_fast(a2, &params.s2_star, k + 1);
    let rd_mod = r * d;
    let w1 = mod_mul(&[reduce_signed(params.v1 as i128, rd_mod), pow_mod(s1s % rd_mod, k1, rd_mod), s2s], rd_mod);
    let w2 = mod_mul(&[reduce_signed(params.v2 as i128, rd_mod), s1s, pow_mod(s2s % rd_mod, k1, rd_mod)], rd_mod);
    let inner = KKParams::new(
        w1 as i64,
        w2 as i64,
        ell / d as i64,
        params.r.mul(&params.d),
        Factored::one(),
        Factored::one(),
    )?;
    let base = kk_prime_level(&inner, k);
    Ok((d as f64).sqrt() * t1 * t2 * base)
}

/// `K_k(w1, w2, l; m, 1, 1)` with `T_k` from the product rule.
fn kk_prime_level(params: &KKParams, k: u32) -> Complex64 {
    let m = params.r.value();
    let table = super::transform::tk_table(&params.r, k);
    let mut acc = Complex64::new(0.0, 0.0);
    for x in units(&params.r) {
        let x = x.value() as i128;
        let a = table[reduce_signed(params.v1 as i128 * x, m) as usize];
        let b = table[reduce_signed(params.v2 as i128 * x, m) as usize];
        acc += a * b * e_frac(params.ell as i128 * x, m);
    }
    acc / (m as f64).sqrt()
}

/// `K_4(v, v, 0; r, s, s) = r^{-1/2} sum over units x mod rs of T_4(v x; rs)^2`.
pub fn kk_diagonal(v: i64, r: &Factored, s: &Factored) -> Result<Complex64, ExpsumError> {
    if gcd(r.value(), s.value()) != 1 {
        return Err(ExpsumError::NotCoprime { r: r.value(), s: s.value() });
    }
    let q = r.mul(s);
    if !q.is_squarefree() {
        return Err(ExpsumError::NotSquarefree(q.value()));
    }
    let table = super::transform::tk_table(&q, 4);
    let qv = q.value();
    let sum: Complex64 = units(&q)
        .map(|x| {
            let t = table[reduce_signed(v as i128 * x.value() as i128, qv) as usize];
            t * t
        })
        .sum();
    Ok(sum / (r.value() as f64).sqrt())
}

/// `phi(rs) phi*(rs) / (r^{3/2} s)` for `v` a unit (zero otherwise).
pub fn kk_diagonal_closed_form(v: i64, r: &Factored, s: &Factored) -> f64 {
    let q = r.mul(s);
    if gcd_signed(v, q.value()) != 1 {
        return 0.0;
    }
    let primitive: u64 = q.primes().map(|p| p.saturating_sub(2)).product();
    q.phi() as f64 * primitive as f64 / ((r.value() as f64).powf(1.5) * s.value() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;

    fn params(v1: i64, v2: i64, ell: i64, r: u64, s1: u64, s2: u64) -> KKParams {
        KKParams::new(v1, v2, ell, factor(r), factor(s1), factor(s2)).unwrap()
    }

    #[test]
    fn trivial_moduli() {
        let v = kk_brute(&params(3, 5, 7, 1, 1, 1), 4).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_example_mod_3() {
        let v = kk_brute(&params(1, 1, 0, 1, 3, 3), 4).unwrap();
        assert!(v.im.abs() < 1e-12 && v.re > 0.0 && v.re <= 3.0);
        let d = kk_diagonal(1, &factor(1), &factor(3)).unwrap();
        assert!((v - d).norm() < 1e-10);
    }

    #[test]
    fn factored_matches_brute() {
        for p in [params(1, 1, 1, 3, 5, 7), params(1, 2, 5, 1, 15, 5), params(2, 11, 10, 7, 15, 5), params(1, 4, 0, 1, 3, 3)] {
            for k in [2u32, 3, 4] {
                let a = kk_brute(&p, k).unwrap();
                let b = kk_factored(&p, k).unwrap();
                assert!((a - b).norm() < 1e-8, "{p:?} k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn degenerate_branches_vanish() {
        // d = 5 does not divide 3
        let p = params(1, 2, 3, 1, 15, 5);
        assert_eq!(kk_factored(&p, 4).unwrap(), Complex64::new(0.0, 0.0));
        assert!(kk_brute(&p, 4).unwrap().norm() < 1e-9);
        // gcd(l, s1* s2*) = 7
        let p = params(1, 2, 7, 1, 7, 11);
        assert_eq!(kk_factored(&p, 4).unwrap(), Complex64::new(0.0, 0.0));
        assert!(kk_brute(&p, 4).unwrap().norm() < 1e-9);
    }

    #[test]
    fn diagonal_closed_form() {
        for (r, s) in [(1u64, 1u64), (1, 3), (5, 3), (7, 15), (2, 35)] {
            let v = kk_diagonal(1, &factor(r), &factor(s)).unwrap();
            let c = kk_diagonal_closed_form(1, &factor(r), &factor(s));
            assert!((v.re - c).abs() < 1e-9 && v.im.abs() < 1e-9);
            assert!(c <= (r as f64).sqrt() * s as f64 + 1e-12);
        }
    }
}
