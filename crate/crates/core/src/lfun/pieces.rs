use num_complex::Complex64;
use serde::Serialize;

use super::central::{root_number, AfeConfig, CoefficientTable};
use super::window::SmoothWindow;
use super::LfunError;
use crate::arith::{gcd, inv_mod, Factored};
use crate::autcoeffs::CoeffProvider;
use crate::dirichlet::CharacterGroup;
use crate::expsums::tk_table;

/// One band `N` of the forward or dual average.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PieceValue {
    pub band: f64,
    pub value: Complex64,
    /// Contribution of `n = 1` from divisors `d > 2`.
    pub main_term: Complex64,
}

fn check_sign(sign: i32) -> Result<(), LfunError> {
    if sign != 1 && sign != -1 {
        return Err(LfunError::Precondition(format!("parity selector must be +1 or -1, got {sign}")));
    }
    Ok(())
}

fn band_range(band: f64, window: &SmoothWindow, len: usize, coeffs: &CoefficientTable) -> Result<(usize, usize), LfunError> {
    let (lo, hi) = window.support();
    let first = ((lo * band).floor() as usize).max(1);
    let last = ((hi * band).ceil() as usize).min(len);
    if last > coeffs.limit() {
        return Err(LfunError::Coefficients { needed: last, available: coeffs.limit() });
    }
    Ok((first, last))
}

/// `(d, mu(q/d) phi(d))` for every divisor `d` of squarefree `q`.
fn divisor_weights(q: &Factored) -> Vec<(u64, i64)> {
    q.factored_divisors().into_iter().map(|d| {
        let c = q.value() / d.value();
        (d.value(), crate::arith::mobius(c) * d.phi() as i64)
    }).collect()
}

/// `F_N = sum_q sum_{d | q} mu(q/d) phi(d) sum_{n = +-1 (d), (n, q) = 1}
/// lambda(n) V(n/N) W_1(n/N_0) / sqrt(n)`, the divisor side of
/// `sum_q sum_{chi primitive} chi(+-1) sum_n chi(n) ...`.
pub fn forward_piece(
    provider: &CoeffProvider,
    coeffs: &CoefficientTable,
    moduli: &[Factored],
    band: f64,
    sign: i32,
    window: &SmoothWindow,
    config: &AfeConfig,
) -> Result<PieceValue, LfunError> {
    check_sign(sign)?;
    let weight = config.weight(provider)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut main_term = Complex64::new(0.0, 0.0);
    for q in moduli {
        let qv = q.value();
        let (n0, _) = config.scales(qv, provider.conductor());
        let (len, _) = config.lengths(qv, provider)?;
        let (first, last) = band_range(band, window, len, coeffs)?;
        let divisors = divisor_weights(q);
        for n in first..=last {
            if gcd(n as u64, qv) != 1 {
                continue;
            }
            let v = window.eval(n as f64 / band);
            if v == 0.0 {
                continue;
            }
            let signed = if sign == 1 { n as i128 } else { -(n as i128) };
            let multiplier: i64 = divisors
                .iter()
                .filter(|(d, _)| crate::arith::reduce_signed(signed - 1, *d) == 0)
                .map(|&(_, w)| w)
                .sum();
            if multiplier == 0 {
                continue;
            }
            let term = coeffs.scaled(n) * weight.eval(n as f64 / n0) * v;
            value += term * multiplier as f64;
            if n == 1 {
                let main: i64 = divisors
                    .iter()
                    .filter(|(d, _)| *d > 2 && crate::arith::reduce_signed(signed - 1, *d) == 0)
                    .map(|&(_, w)| w)
                    .sum();
                main_term += term * main as f64;
            }
        }
    }
    Ok(PieceValue { band, value, main_term })
}

/// Character side of [`forward_piece`], one transform per modulus.
pub fn forward_piece_direct(
    provider: &CoeffProvider,
    coeffs: &CoefficientTable,
    moduli: &[Factored],
    band: f64,
    sign: i32,
    window: &SmoothWindow,
    config: &AfeConfig,
) -> Result<Complex64, LfunError> {
    check_sign(sign)?;
    let weight = config.weight(provider)?;
    let mut total = Complex64::new(0.0, 0.0);
    for q in moduli {
        let qv = q.value();
        let group = CharacterGroup::new(q)?;
        let (n0, _) = config.scales(qv, provider.conductor());
        let (len, _) = config.lengths(qv, provider)?;
        let (first, last) = band_range(band, window, len, coeffs)?;
        let mut sums = vec![Complex64::new(0.0, 0.0); group.order()];
        for n in first..=last {
            if let Some(u) = group.unit_index(n as i64) {
                sums[u] += coeffs.scaled(n) * weight.eval(n as f64 / n0) * window.eval(n as f64 / band);
            }
        }
        group.transform(&mut sums);
        for chi in group.primitive_characters() {
            let selector = if sign == 1 { 1.0 } else { chi.parity() as f64 };
            total += sums[chi.id()] * selector;
        }
    }
    Ok(total)
}

/// `D_M = sum_q sum_m conj(lambda(m)) V(m/M) W_2(m/M_0) / sqrt(m) E_pi(+-m; q)`
/// with `E_pi(m; q) = sqrt(q) c_pi w_pi(q) T_4(N m^-1; q)`.
pub fn dual_piece(
    provider: &CoeffProvider,
    coeffs: &CoefficientTable,
    moduli: &[Factored],
    band: f64,
    sign: i32,
    window: &SmoothWindow,
    config: &AfeConfig,
) -> Result<PieceValue, LfunError> {
    check_sign(sign)?;
    let weight = config.weight(provider)?;
    let conductor = provider.conductor();
    let mut value = Complex64::new(0.0, 0.0);
    for q in moduli {
        let qv = q.value();
        if gcd(qv, conductor) != 1 {
            return Err(LfunError::Ramified { q: qv, conductor });
        }
        let (_, m0) = config.scales(qv, conductor);
        let (_, len) = config.lengths(qv, provider)?;
        let (first, last) = band_range(band, window, len, coeffs)?;
        let t4 = tk_table(q, 4);
        let scale = (qv as f64).sqrt() * provider.root_constant() * provider.central_value(qv);
        for m in first..=last {
            let signed = if sign == 1 { m as i64 } else { -(m as i64) };
            let Ok(inv) = inv_mod(signed, qv) else { continue };
            let v = window.eval(m as f64 / band);
            if v == 0.0 {
                continue;
            }
            let arg = (conductor as u128 * inv.value() as u128 % qv as u128) as usize;
            let e_pi = scale * t4[arg];
            value += coeffs.scaled(m).conj() * weight.eval(m as f64 / m0).conj() * v * e_pi;
        }
    }
    Ok(PieceValue { band, value, main_term: Complex64::new(0.0, 0.0) })
}

/// Character side of [`dual_piece`]: `sum_chi chi(+-1) eps(chi) sum_m conj(chi(m)) ...`.
pub fn dual_piece_direct(
    provider: &CoeffProvider,
    coeffs: &CoefficientTable,
    moduli: &[Factored],
    band: f64,
    sign: i32,
    window: &SmoothWindow,
    config: &AfeConfig,
) -> Result<Complex64, LfunError> {
    check_sign(sign)?;
    let weight = config.weight(provider)?;
    let mut total = Complex64::new(0.0, 0.0);
    for q in moduli {
        let qv = q.value();
        let group = CharacterGroup::new(q)?;
        let (_, m0) = config.scales(qv, provider.conductor());
        let (_, len) = config.lengths(qv, provider)?;
        let (first, last) = band_range(band, window, len, coeffs)?;
        for chi in group.primitive_characters() {
            let eps = root_number(provider, &chi)?;
            let selector = if sign == 1 { 1.0 } else { chi.parity() as f64 };
            let mut acc = Complex64::new(0.0, 0.0);
            for m in first..=last {
                acc += chi.eval(m as i64).conj()
                    * coeffs.scaled(m).conj()
                    * weight.eval(m as f64 / m0).conj()
                    * window.eval(m as f64 / band);
            }
            total += acc * eps * selector;
        }
    }
    Ok(total)
}

/// Powers of two `N = 1, 2, 4, ...` whose bands meet `[1, len]`.
pub fn band_scales(len: usize, window: &SmoothWindow) -> Vec<f64> {
    let (lo, _) = window.support();
    let mut out = Vec::new();
    let mut n = 1.0f64;
    while lo * n < len as f64 + 1.0 {
        out.push(n);
        n *= 2.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;
    use crate::autcoeffs::sym3_delta;

    #[test]
    fn divisor_side_matches_character_side() {
        let pi = sym3_delta(30_000);
        let coeffs = CoefficientTable::new(&pi, 30_000).unwrap();
        let v = SmoothWindow::partition();
        let config = AfeConfig::default();
        let moduli = vec![factor(15)];
        for sign in [1, -1] {
            for band in [1.0, 2.0, 4.0, 64.0, 1024.0] {
                let f = forward_piece(&pi, &coeffs, &moduli, band, sign, &v, &config).unwrap();
                let fd = forward_piece_direct(&pi, &coeffs, &moduli, band, sign, &v, &config).unwrap();
                assert!((f.value - fd).norm() < 1e-6, "F band {band} sign {sign}: {f:?} vs {fd}");
                let d = dual_piece(&pi, &coeffs, &moduli, band, sign, &v, &config).unwrap();
                let dd = dual_piece_direct(&pi, &coeffs, &moduli, band, sign, &v, &config).unwrap();
                assert!((d.value - dd).norm() < 1e-6, "D band {band} sign {sign}: {d:?} vs {dd}");
            }
        }
    }

    #[test]
    fn odd_selector_has_no_main_term() {
        let pi = sym3_delta(1000);
        let coeffs = CoefficientTable::new(&pi, 1000).unwrap();
        let v = SmoothWindow::partition();
        let config = AfeConfig::default();
        let moduli = vec![factor(15), factor(7)];
        let even = forward_piece(&pi, &coeffs, &moduli, 1.0, 1, &v, &config).unwrap();
        let odd = forward_piece(&pi, &coeffs, &moduli, 1.0, -1, &v, &config).unwrap();
        assert!(even.main_term.norm() > 0.1);
        assert_eq!(odd.main_term, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn bands_cover_the_range() {
        let v = SmoothWindow::partition();
        let b = band_scales(1000, &v);
        assert_eq!(b[0], 1.0);
        assert!(b.last().unwrap() * 0.25 < 1001.0 && b.last().unwrap() * 0.5 >= 1000.0);
    }
}
