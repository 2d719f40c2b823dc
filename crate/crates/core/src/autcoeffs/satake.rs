use num_complex::Complex64;
use serde::Serialize;

use super::AutError;

const CLOSURE_TOL: f64 = 1e-8;

/// The four Satake parameters at an unramified prime.
#[derive(Debug, Clone, PartialEq)]
pub struct SatakeLocal {
    pub prime: u64,
    pub alphas: [Complex64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SatakeTag {
    /// All parameters on the unit circle.
    A,
    /// `{p^t a, p^-t a, b, c}` with `|a| = |b| = |c| = 1`.
    B,
    /// `{p^t a, p^-t a, p^s b, p^-s b}`.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SatakeClass {
    pub tag: SatakeTag,
    pub t: f64,
    pub s: f64,
}

impl SatakeLocal {
    pub fn new(prime: u64, alphas: [Complex64; 4]) -> Self {
        SatakeLocal { prime, alphas }
    }

    /// Roots of `X^2 - lambda X + 1`.
    pub fn gl2(lambda: f64) -> (Complex64, Complex64) {
        let disc = lambda * lambda - 4.0;
        if disc <= 0.0 {
            let im = (-disc).sqrt() / 2.0;
            (Complex64::new(lambda / 2.0, im), Complex64::new(lambda / 2.0, -im))
        } else {
            let r = disc.sqrt();
            (Complex64::new((lambda + r) / 2.0, 0.0), Complex64::new((lambda - r) / 2.0, 0.0))
        }
    }

    /// Symmetric-cube lift `{a^3, a, b, b^3}` of a GL(2) eigenvalue.
    pub fn sym3(prime: u64, lambda: f64) -> Self {
        let (a, b) = Self::gl2(lambda);
        SatakeLocal { prime, alphas: [a * a * a, a, b, b * b * b] }
    }

    /// Tensor product `{a1 a2, a1 b2, b1 a2, b1 b2}`.
    pub fn rankin(prime: u64, lambda1: f64, lambda2: f64) -> Self {
        let (a1, b1) = Self::gl2(lambda1);
        let (a2, b2) = Self::gl2(lambda2);
        SatakeLocal { prime, alphas: [a1 * a2, a1 * b2, b1 * a2, b1 * b2] }
    }

    /// Elementary symmetric functions `e_1..e_4`.
    pub fn elementary(&self) -> [Complex64; 4] {
        let mut e = [Complex64::new(0.0, 0.0); 5];
        e[0] = Complex64::new(1.0, 0.0);
        for &a in &self.alphas {
            for j in (1..5).rev() {
                e[j] = e[j] + e[j - 1] * a;
            }
        }
        [e[1], e[2], e[3], e[4]]
    }

    /// `a(p^l) = sum alpha_j^l`.
    pub fn power_sum(&self, l: u32) -> Complex64 {
        self.alphas.iter().map(|a| a.powi(l as i32)).sum()
    }

    /// `lambda(p^k)` for `k = 0..=kmax` (complete homogeneous symmetric
    /// polynomials) by the recurrence with elementary symmetric functions.
    pub fn lambda_powers(&self, kmax: usize) -> Vec<Complex64> {
        let e = self.elementary();
        let mut h = vec![Complex64::new(1.0, 0.0)];
        for k in 1..=kmax {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 1..=4.min(k) {
                let term = e[i - 1] * h[k - i];
                acc += if i % 2 == 1 { term } else { -term };
            }
            h.push(acc);
        }
        h
    }

    /// Checks that the multiset is closed under `z -> 1/conj(z)`.
    pub fn check_closure(&self) -> Result<(), AutError> {
        let mut used = [false; 4];
        for a in &self.alphas {
            if a.norm() == 0.0 {
                return Err(AutError::Validation(format!("zero Satake parameter at p={}", self.prime)));
            }
            let target = Complex64::new(1.0, 0.0) / a.conj();
            let hit = (0..4).find(|&j| !used[j] && (self.alphas[j] - target).norm() <= CLOSURE_TOL * (1.0 + target.norm()));
            match hit {
                Some(j) => used[j] = true,
                None => {
                    return Err(AutError::Validation(format!(
                        "Satake parameters at p={} are not closed under z -> 1/conj(z)",
                        self.prime
                    )))
                }
            }
        }
        Ok(())
    }

    /// Reads off which of the three shapes the parameters take.
    pub fn classify(&self) -> Result<SatakeClass, AutError> {
        self.check_closure()?;
        let lp = (self.prime as f64).ln();
        let mut exps: Vec<f64> = self.alphas.iter().map(|a| a.norm().ln() / lp).collect();
        exps.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let tol = CLOSURE_TOL;
        let (t, s) = (exps[0].max(0.0), exps[1].max(0.0));
        if t <= tol {
            Ok(SatakeClass { tag: SatakeTag::A, t: 0.0, s: 0.0 })
        } else if s <= tol {
            Ok(SatakeClass { tag: SatakeTag::B, t, s: 0.0 })
        } else {
            Ok(SatakeClass { tag: SatakeTag::C, t, s })
        }
    }

    /// Local coefficient of the exterior square, `sum over i < j of a_i a_j`.
    pub fn exterior_square(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in i + 1..4 {
                acc += self.alphas[i] * self.alphas[j];
            }
        }
        acc
    }
}

/// Newton's identities: power sums `a(p^1..p^k)` from `lambda(p^0..p^k)` via
/// `k lambda(p^k) = sum_{l=1}^k a(p^l) lambda(p^{k-l})`.
pub fn power_sums_from_lambdas(lambdas: &[Complex64]) -> Vec<Complex64> {
    let kmax = lambdas.len() - 1;
    let mut a = vec![Complex64::new(0.0, 0.0); kmax + 1];
    for k in 1..=kmax {
        let mut acc = lambdas[k] * k as f64;
        for l in 1..k {
            acc -= a[l] * lambdas[k - l];
        }
        a[k] = acc;
    }
    a
}

/// Inverse direction of [`power_sums_from_lambdas`]; `power_sums[0]` is ignored.
pub fn lambdas_from_power_sums(power_sums: &[Complex64]) -> Vec<Complex64> {
    let kmax = power_sums.len() - 1;
    let mut h = vec![Complex64::new(1.0, 0.0); kmax + 1];
    for k in 1..=kmax {
        let acc: Complex64 = (1..=k).map(|l| power_sums[l] * h[k - l]).sum();
        h[k] = acc / k as f64;
    }
    h
}

/// Elementary symmetric functions from `h_1..h_4`.
pub fn elementary_from_lambdas(h: &[Complex64; 4]) -> [Complex64; 4] {
    let e1 = h[0];
    let e2 = e1 * h[0] - h[1];
    let e3 = h[2] - e1 * h[1] + e2 * h[0];
    let e4 = e1 * h[2] - e2 * h[1] + e3 * h[0] - h[3];
    [e1, e2, e3, e4]
}

/// Roots of `x^4 - e1 x^3 + e2 x^2 - e3 x + e4` by Durand-Kerner iteration.
pub fn quartic_roots(e: &[Complex64; 4]) -> [Complex64; 4] {
    let poly = |x: Complex64| (((x - e[0]) * x + e[1]) * x - e[2]) * x + e[3];
    let seed = Complex64::new(0.4, 0.9);
    let mut z = [seed, seed.powi(2), seed.powi(3), seed.powi(4)];
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = poly(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}
