use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use super::gamma::ln_gamma_r;
use super::LfunError;

/// Test function `G(s)` in the Mellin integral defining the cutoff weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
pub enum MellinKernel {
    /// `G(s) = 1`.
    #[default]
    Unit,
    /// `G(s) = exp(s^2)`.
    Gaussian,
}

impl MellinKernel {
    fn ln_eval(self, s: Complex64) -> Complex64 {
        match self {
            MellinKernel::Unit => Complex64::new(0.0, 0.0),
            MellinKernel::Gaussian => s * s,
        }
    }
}

/// Which side of the functional equation a weight serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightRole {
    /// `W_1`, built from `mu`.
    Forward,
    /// `W_2`, built from `conj(mu)`.
    Dual,
}

const RIGHT_SIGMAS: [f64; 7] = [1.2, 2.5, 5.0, 8.0, 12.0, 16.0, 20.0];
const LEFT_SIGMAS: [f64; 5] = [0.25, 0.6, 1.2, 2.5, 3.0];
const U_LO: f64 = -25.0;
const U_CAP: f64 = 14.0;
const GRID_PER_UNIT: f64 = 200.0;
const NEGLIGIBLE: f64 = 1e-12;
const REFINE_TOL: f64 = 1e-12;
const PROBES: [f64; 15] = [-25.0, -12.0, -5.0, -2.0, -0.5, -1e-3, 0.0, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0, 9.0, 13.0];

/// Trapezoid nodes of one vertical contour: `W = residue + sum c_j x^{-s_j}`.
#[derive(Debug, Clone)]
struct Contour {
    sigma: f64,
    residue: f64,
    /// `ln |G(s) g(s) / s|` at `t = 0`.
    log_size: f64,
    nodes: Vec<(Complex64, Complex64)>,
}

impl Contour {
    fn eval(&self, u: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(s, c) in &self.nodes {
            acc += c * (-s * u).exp();
        }
        acc + self.residue
    }

    fn eval_with_slope(&self, u: f64) -> (Complex64, Complex64) {
        let mut w = Complex64::new(0.0, 0.0);
        let mut dw = Complex64::new(0.0, 0.0);
        for &(s, c) in &self.nodes {
            let term = c * (-s * u).exp();
            w += term;
            dw -= s * term;
        }
        (w + self.residue, dw)
    }

    fn cost(&self, u: f64) -> f64 {
        self.log_size - self.sigma * u
    }
}

/// `ln(gamma(1/2 + s) / gamma(1/2))` with `gamma(s) = prod Gamma_R(s + mu_j)`.
fn ln_gamma_ratio(mu: &[Complex64; 4], s: Complex64) -> Complex64 {
    let half = Complex64::new(0.5, 0.0);
    mu.iter().map(|&m| ln_gamma_r(half + s + m) - ln_gamma_r(half + m)).sum()
}

fn build_contour(mu: &[Complex64; 4], kernel: MellinKernel, sigma: f64, h: f64) -> Contour {
    let integrand = |t: f64| {
        let s = Complex64::new(sigma, t);
        ((kernel.ln_eval(s) + ln_gamma_ratio(mu, s)).exp()) / s
    };
    let f0 = integrand(0.0);
    let log_size = f0.norm().ln();
    let mut nodes = vec![(Complex64::new(sigma, 0.0), f0 * h / (2.0 * PI))];
    let mut peak = f0.norm();
    for direction in [1.0, -1.0] {
        let mut j = 1.0;
        let mut quiet = 0;
        while quiet < 4 && j * h < 2000.0 {
            let t = direction * j * h;
            let f = integrand(t);
            peak = peak.max(f.norm());
            quiet = if f.norm() < 1e-20 * peak { quiet + 1 } else { 0 };
            nodes.push((Complex64::new(sigma, t), f * h / (2.0 * PI)));
            j += 1.0;
        }
    }
    // the trapezoid sum above integrates over ds = i dt, giving 1/(2 pi) after the i
    let residue = if sigma < 0.0 { 1.0 } else { 0.0 };
    Contour { sigma, residue, log_size, nodes }
}

/// Cutoff weight `W(x) = (1/2 pi i) integral G(s) gamma(1/2+s)/gamma(1/2) x^{-s} ds/s`,
/// tabulated on `u = ln x` with cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct AfeWeight {
    mu: [Complex64; 4],
    kernel: MellinKernel,
    contours: Vec<Contour>,
    u_hi: f64,
    values: Vec<Complex64>,
    slopes: Vec<Complex64>,
}

impl AfeWeight {
    pub fn new(mu: [Complex64; 4], kernel: MellinKernel) -> Result<Self, LfunError> {
        let min_re = mu.iter().map(|m| m.re).fold(f64::INFINITY, f64::min);
        if min_re + 0.5 <= 0.0 {
            return Err(LfunError::Precondition(format!("archimedean shifts with Re(mu) = {min_re} put a pole right of the line")));
        }
        let left_limit = 0.5 + min_re - 0.1;
        let sigmas: Vec<f64> = LEFT_SIGMAS
            .iter()
            .filter(|&&s| s < left_limit)
            .map(|&s| -s)
            .chain(RIGHT_SIGMAS.iter().copied())
            .collect();
        if !sigmas.iter().any(|&s| s < 0.0) {
            return Err(LfunError::Precondition("no admissible left contour".into()));
        }
        let mut contours: Vec<Contour> = sigmas.iter().map(|&s| build_contour(&mu, kernel, s, 0.5)).collect();
        let select = |cs: &[Contour], u: f64| -> usize { select_contour(cs, u) };
        // refine each contour on the probes it serves
        for i in 0..contours.len() {
            let probes: Vec<f64> = PROBES.iter().copied().filter(|&u| select(&contours, u) == i).collect();
            if probes.is_empty() {
                continue;
            }
            let mut h = 0.5;
            let mut converged = false;
            for _ in 0..10 {
                let finer = build_contour(&mu, kernel, contours[i].sigma, h / 2.0);
                let worst = probes
                    .iter()
                    .map(|&u| (finer.eval(u) - contours[i].eval(u)).norm())
                    .fold(0.0, f64::max);
                contours[i] = finer;
                h /= 2.0;
                if worst < REFINE_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(LfunError::Quadrature { sigma: contours[i].sigma });
            }
        }
        let mut weight = AfeWeight { mu, kernel, contours, u_hi: U_CAP, values: Vec::new(), slopes: Vec::new() };
        // cutoff: first quarter-step beyond which |W| stays negligible
        let mut u = 0.0;
        while u < U_CAP {
            if weight.exact_log(u).norm() < NEGLIGIBLE && weight.exact_log(u + 0.25).norm() < NEGLIGIBLE {
                break;
            }
            u += 0.25;
        }
        weight.u_hi = u.min(U_CAP);
        let n = ((weight.u_hi - U_LO) * GRID_PER_UNIT).round() as usize + 1;
        let (values, slopes): (Vec<_>, Vec<_>) = (0..n)
            .map(|i| {
                let u = U_LO + i as f64 / GRID_PER_UNIT;
                weight.contours[select_contour(&weight.contours, u)].eval_with_slope(u)
            })
            .unzip();
        weight.values = values;
        weight.slopes = slopes;
        Ok(weight)
    }

    /// Process-wide instance for `(mu, kernel)`, built once.
    pub fn shared(mu: [Complex64; 4], kernel: MellinKernel) -> Result<Arc<Self>, LfunError> {
        type Key = ([u64; 8], MellinKernel);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<AfeWeight>>>> = OnceLock::new();
        let mut key = [0u64; 8];
        for (j, m) in mu.iter().enumerate() {
            key[2 * j] = m.re.to_bits();
            key[2 * j + 1] = m.im.to_bits();
        }
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        if let Some(w) = guard.get(&(key, kernel)) {
            return Ok(w.clone());
        }
        let w = Arc::new(AfeWeight::new(mu, kernel)?);
        guard.insert((key, kernel), w.clone());
        Ok(w)
    }

    pub fn mu(&self) -> [Complex64; 4] {
        self.mu
    }

    pub fn kernel(&self) -> MellinKernel {
        self.kernel
    }

    /// Beyond this `x` the weight is treated as zero.
    pub fn cutoff(&self) -> f64 {
        self.u_hi.exp()
    }

    /// Largest `|W|` at or beyond the cutoff, sampled.
    pub fn tail_bound(&self) -> f64 {
        (0..8).map(|i| self.exact_log(self.u_hi + 0.25 * i as f64).norm()).fold(0.0, f64::max)
    }

    fn exact_log(&self, u: f64) -> Complex64 {
        self.contours[select_contour(&self.contours, u)].eval(u)
    }

    /// Direct quadrature, no interpolation.
    pub fn exact(&self, x: f64) -> Complex64 {
        self.exact_log(x.ln())
    }

    /// Interpolated value; `1` below `e^-25`, `0` past the cutoff.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.eval_log(x.ln())
    }

    pub fn eval_log(&self, u: f64) -> Complex64 {
        if u <= U_LO {
            return Complex64::new(1.0, 0.0);
        }
        if u >= self.u_hi {
            return Complex64::new(0.0, 0.0);
        }
        let pos = (u - U_LO) * GRID_PER_UNIT;
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - i as f64;
        let h = 1.0 / GRID_PER_UNIT;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.values[i] * h00 + self.slopes[i] * (h10 * h) + self.values[i + 1] * h01 + self.slopes[i + 1] * (h11 * h)
    }

    /// Real part of the interpolated weight, for self-dual data.
    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(x).re
    }
}

fn select_contour(contours: &[Contour], u: f64) -> usize {
    let left = u < 0.0;
    let mut best = None;
    let mut best_cost = f64::INFINITY;
    for (i, c) in contours.iter().enumerate() {
        if (c.sigma < 0.0) != left {
            continue;
        }
        let cost = c.cost(u);
        if cost < best_cost {
            best_cost = cost;
            best = Some(i);
        }
    }
    best.expect("both half-planes have contours")
}

/// `W_1(x)` (or `W_2(x)`) by direct quadrature with `G = 1`.
pub fn afe_weight(role: WeightRole, x: f64, mu: [Complex64; 4]) -> Result<Complex64, LfunError> {
    if !(x > 0.0) {
        return Err(LfunError::Precondition(format!("weight argument must be positive, got {x}")));
    }
    let w = AfeWeight::shared(mu, MellinKernel::Unit)?;
    Ok(match role {
        WeightRole::Forward => w.exact(x),
        WeightRole::Dual => w.exact(x).conj(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym3_mu() -> [Complex64; 4] {
        [16.5, 17.5, 5.5, 6.5].map(|m| Complex64::new(m, 0.0))
    }

    #[test]
    fn limits_and_reference_values() {
        let w = AfeWeight::shared(sym3_mu(), MellinKernel::Unit).unwrap();
        assert!((w.exact(1e-6) - 1.0).norm() < 1e-6);
        assert!(w.exact(1e3).norm() < 1e-8);
        let w1 = w.exact(1.0).re;
        assert!(w1 > 0.0 && w1 < 1.2);
        // independent high-precision quadrature
        assert!((w1 - 0.94754).abs() < 1e-4, "{w1}");
        assert!((w.exact(10.0).re - 2.7e-4).abs() < 0.1e-4);
        assert!(w.cutoff() < 100.0 && w.tail_bound() < 1e-12);
    }

    #[test]
    fn interpolation_matches_quadrature() {
        let w = AfeWeight::shared(sym3_mu(), MellinKernel::Unit).unwrap();
        for x in [1e-9, 0.013, 0.3, 0.999, 1.0, 1.7, 4.2, 9.9, 23.0] {
            let diff = (w.eval(x) - w.exact(x)).norm();
            assert!(diff < 1e-11, "x={x}: {diff}");
        }
    }

    #[test]
    fn both_sides_agree_near_one() {
        // the left and right contours differ by the residue at s = 0
        let w = AfeWeight::new(sym3_mu(), MellinKernel::Unit).unwrap();
        let left = select_contour(&w.contours, -1e-3);
        let right = select_contour(&w.contours, 1e-3);
        for u in [-1e-3, 0.0, 1e-3] {
            let gap = (w.contours[left].eval(u) - w.contours[right].eval(u)).norm();
            assert!(gap < 1e-10, "u={u}: {gap}");
        }
    }

    #[test]
    fn gaussian_kernel_decays_slower() {
        let unit = AfeWeight::shared(sym3_mu(), MellinKernel::Unit).unwrap();
        let gauss = AfeWeight::shared(sym3_mu(), MellinKernel::Gaussian).unwrap();
        assert!(gauss.cutoff() > unit.cutoff());
        assert!((gauss.exact(1e-6) - 1.0).norm() < 1e-6);
    }

    #[test]
    fn dual_role_conjugates() {
        let mu = [Complex64::new(1.0, 0.5), Complex64::new(2.0, -0.3), Complex64::new(0.5, 0.0), Complex64::new(1.5, 0.2)];
        let f = afe_weight(WeightRole::Forward, 1.3, mu).unwrap();
        let conj_mu = mu.map(|m| m.conj());
        let d = afe_weight(WeightRole::Forward, 1.3, conj_mu).unwrap();
        assert!((d - f.conj()).norm() < 1e-11);
        assert!((afe_weight(WeightRole::Dual, 1.3, mu).unwrap() - d).norm() < 1e-11);
        assert!(afe_weight(WeightRole::Forward, 0.0, mu).is_err());
    }
}
