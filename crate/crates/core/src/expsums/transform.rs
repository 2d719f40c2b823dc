use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use super::ExpsumError;
use crate::arith::{gcd, gcd_signed, inv_mod, pow_mod, reduce_signed, Factored};
use crate::autcoeffs::CoeffProvider;
use crate::dirichlet::{local_table, CharacterGroup};
use crate::lfun::root_number;

/// Largest modulus accepted by [`t_k_brute`].
pub const T_BRUTE_BUDGET: u64 = 10_000;

/// A value of `T_k(l; q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformValue {
    pub value: Complex64,
    pub modulus: Factored,
    pub k: u32,
}

fn scaled_power(tau: Complex64, q: u64, k: u32) -> Complex64 {
    (tau / (q as f64).sqrt()).powi(k as i32)
}

/// `T_k(l; q)` by enumerating primitive characters mod `q`.
pub fn t_k_brute(ell: i64, q: &Factored, k: u32) -> Result<TransformValue, ExpsumError> {
    if !q.is_squarefree() {
        return Err(ExpsumError::NotSquarefree(q.value()));
    }
    if q.value() > T_BRUTE_BUDGET {
        return Err(ExpsumError::Budget { what: "t_k_brute", size: q.value(), cap: T_BRUTE_BUDGET });
    }
    let group = CharacterGroup::new(q)?;
    Ok(TransformValue { value: t_k_in_group(&group, ell, k), modulus: q.clone(), k })
}

pub(crate) fn t_k_in_group(group: &Arc<CharacterGroup>, ell: i64, k: u32) -> Complex64 {
    let qv = group.modulus().value();
    if gcd_signed(ell, qv) != 1 {
        return Complex64::new(0.0, 0.0);
    }
    let gauss = group.gauss_table();
    let sum: Complex64 = (0..group.order())
        .filter(|&id| group.is_primitive_id(id))
        .map(|id| scaled_power(gauss[id], qv, k) * group.eval_id(id, ell))
        .sum();
    sum / (qv as f64).sqrt()
}

/// `T_k(m; rs) = T_k(m r^k; s) T_k(m s^k; r)` with both factors enumerated.
pub fn t_k_factored(m: i64, r: &Factored, s: &Factored, k: u32) -> Result<TransformValue, ExpsumError> {
    if gcd(r.value(), s.value()) != 1 {
        return Err(ExpsumError::NotCoprime { r: r.value(), s: s.value() });
    }
    let q = r.mul(s);
    if r.value() == 1 || s.value() == 1 {
        return t_k_brute(m, &q, k);
    }
    let m_r = twist(m, r.value(), k, s.value());
    let m_s = twist(m, s.value(), k, r.value());
    let a = t_k_brute(m_r, s, k)?;
    let b = t_k_brute(m_s, r, k)?;
    Ok(TransformValue { value: a.value * b.value, modulus: q, k })
}

/// `m c^k mod modulus` as a signed representative.
fn twist(m: i64, c: u64, k: u32, modulus: u64) -> i64 {
    let ck = pow_mod(c, k as u64, modulus);
    ((reduce_signed(m as i128, modulus) as u128 * ck as u128) % modulus as u128) as i64
}

/// Values of `T_k(x; p)` for `x` in `0..p`, shared per `(p, k)`.
pub fn local_tk(p: u64, k: u32) -> Arc<Vec<Complex64>> {
    static REG: OnceLock<Mutex<HashMap<(u64, u32), Arc<Vec<Complex64>>>>> = OnceLock::new();
    let reg = REG.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = reg.lock().unwrap().get(&(p, k)) {
        return t.clone();
    }
    let local = local_table(p, None).expect("in-memory local tables cannot fail");
    let n = (p - 1) as usize;
    let mut coeffs: Vec<Complex64> = (0..n)
        .map(|e| if e == 0 { Complex64::new(0.0, 0.0) } else { scaled_power(local.gauss(e as u64), p, k) })
        .collect();
    if n > 1 {
        rustfft::FftPlanner::new().plan_fft_inverse(n).process(&mut coeffs);
    }
    let norm = (p as f64).sqrt();
    let mut values = vec![Complex64::new(0.0, 0.0); p as usize];
    for (x, v) in values.iter_mut().enumerate().skip(1) {
        let l = local.log(x as u64).expect("nonzero residues mod p are units") as usize;
        *v = coeffs[l] / norm;
    }
    let values = Arc::new(values);
    reg.lock().unwrap().entry((p, k)).or_insert_with(|| values.clone());
    values
}

/// `T_k(l; q)` as a product of prime-level values.
pub fn t_k_fast(ell: i64, q: &Factored, k: u32) -> Complex64 {
    let qv = q.value();
    q.primes().fold(Complex64::new(1.0, 0.0), |acc, p| {
        let x = twist(ell, qv / p, k, p);
        acc * local_tk(p, k)[x as usize]
    })
}

/// `T_k(x; q)` for every `x` in `0..q`, from prime-level tables.
pub fn tk_table(q: &Factored, k: u32) -> Vec<Complex64> {
    let qv = q.value();
    let locals: Vec<(u64, u64, Arc<Vec<Complex64>>)> =
        q.primes().map(|p| (p, pow_mod(qv / p, k as u64, p), local_tk(p, k))).collect();
    (0..qv)
        .map(|x| {
            locals.iter().fold(Complex64::new(1.0, 0.0), |acc, (p, c, t)| {
                acc * t[((x % p) * c % p) as usize]
            })
        })
        .collect()
}

/// `T_k(x; q)` for every `x` in `0..q`, by one character-to-unit transform of
/// the primitive Gauss-sum powers; independent of the product rule.
pub fn tk_table_by_characters(group: &CharacterGroup, k: u32) -> Vec<Complex64> {
    let qv = group.modulus().value();
    let gauss = group.gauss_table();
    let mut data: Vec<Complex64> = (0..group.order())
        .map(|id| {
            if group.is_primitive_id(id) {
                scaled_power(gauss[id], qv, k)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    group.transform(&mut data);
    let norm = (qv as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); qv as usize];
    for (u, v) in data.iter().enumerate() {
        out[group.unit_at(u) as usize] = v / norm;
    }
    out
}

fn check_conductor(q: &Factored, provider: &CoeffProvider) -> Result<(), ExpsumError> {
    if gcd(q.value(), provider.conductor()) != 1 {
        return Err(ExpsumError::Precondition(format!(
            "modulus {} shares a factor with the conductor {}",
            q.value(),
            provider.conductor()
        )));
    }
    Ok(())
}

/// `sum over primitive chi of eps(pi, chi) conj(chi(m))`, term by term.
pub fn e_pi_transform_character_side(m: i64, q: &Factored, provider: &CoeffProvider) -> Result<Complex64, ExpsumError> {
    check_conductor(q, provider)?;
    let group = CharacterGroup::new(q)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for chi in group.primitive_characters() {
        let eps = root_number(provider, &chi).map_err(|e| ExpsumError::RootNumber(e.to_string()))?;
        sum += eps * chi.eval(m).conj();
    }
    Ok(sum)
}

/// `E_pi(m; q) = sqrt(q) c_pi w_pi(q) T_4(N m^-1; q)`.
pub fn e_pi_transform_formula(m: i64, q: &Factored, provider: &CoeffProvider) -> Result<Complex64, ExpsumError> {
    check_conductor(q, provider)?;
    let qv = q.value();
    Ok(match inv_mod(m, qv) {
        Err(_) => Complex64::new(0.0, 0.0),
        Ok(m_inv) => {
            let arg = (provider.conductor() as u128 * m_inv.value() as u128 % qv as u128) as i64;
            (qv as f64).sqrt() * provider.root_constant() * provider.central_value(qv) * t_k_fast(arg, q, 4)
        }
    })
}

/// [`e_pi_transform_formula`], checked against the character side.
pub fn e_pi_transform(m: i64, q: &Factored, provider: &CoeffProvider) -> Result<Complex64, ExpsumError> {
    let qv = q.value();
    let formula = e_pi_transform_formula(m, q, provider)?;
    let direct = e_pi_transform_character_side(m, q, provider)?;
    let discrepancy = (direct - formula).norm();
    let tolerance = 1e-6 * qv as f64;
    if discrepancy > tolerance {
        return Err(ExpsumError::Consistency { what: "e_pi_transform", discrepancy, tolerance });
    }
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn brute_examples() {
        assert!((t_k_brute(1, &factor(1), 4).unwrap().value - c(1.0)).norm() < 1e-12);
        let v = t_k_brute(1, &factor(3), 2).unwrap().value;
        assert!((v - c(-1.0 / 3f64.sqrt())).norm() < 1e-12);
        assert_eq!(t_k_brute(3, &factor(3), 4).unwrap().value, c(0.0));
    }

    #[test]
    fn factored_examples() {
        let f = t_k_factored(1, &factor(3), &factor(5), 2).unwrap().value;
        let f2 = t_k_brute(9, &factor(5), 2).unwrap().value * t_k_brute(25, &factor(3), 2).unwrap().value;
        let b = t_k_brute(1, &factor(15), 2).unwrap().value;
        assert!((f - b).norm() < 1e-10 && (f - f2).norm() < 1e-12);
        let f = t_k_factored(2, &factor(3), &factor(7), 4).unwrap().value;
        let b = t_k_brute(2, &factor(21), 4).unwrap().value;
        assert!((f - b).norm() < 1e-9);
        assert!(t_k_factored(1, &factor(3), &factor(6), 2).is_err());
    }

    #[test]
    fn tables_agree() {
        for q in [1u64, 2, 5, 15, 42, 105, 385] {
            let qf = factor(q);
            let group = CharacterGroup::new(&qf).unwrap();
            for k in 1..=5 {
                let a = tk_table(&qf, k);
                let b = tk_table_by_characters(&group, k);
                for x in 0..q as usize {
                    assert!((a[x] - b[x]).norm() < 1e-10, "q={q} k={k} x={x}");
                    assert!((t_k_fast(x as i64, &qf, k) - a[x]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn even_k_is_real() {
        for x in 1..77 {
            let v = t_k_fast(x, &factor(77), 4);
            assert!(v.im.abs() < 1e-9 * (1.0 + v.norm()));
        }
    }
}
