use num_complex::Complex64;
use serde::Serialize;

use super::ExpsumError;
use crate::dirichlet::e_frac;
use crate::lfun::SmoothWindow;

const QUADRATURE_POINTS: usize = 1 << 14;
const TAIL_RUN: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct PoissonReport {
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    pub discrepancy: f64,
    pub dual_terms: usize,
}

/// Trapezoid samples of a compactly supported window; the rule is spectrally
/// accurate for `|xi|` well below the Nyquist limit `N / (2 (hi - lo))`.
struct Sampled {
    lo: f64,
    h: f64,
    values: Vec<f64>,
}

impl Sampled {
    fn new(window: &SmoothWindow) -> Self {
        let (lo, hi) = window.support();
        let h = (hi - lo) / QUADRATURE_POINTS as f64;
        let values = (1..QUADRATURE_POINTS).map(|i| window.eval(lo + i as f64 * h)).collect();
        Sampled { lo, h, values }
    }

    fn nyquist(&self) -> f64 {
        0.25 / self.h
    }

    /// `hat V(xi) = integral of V(x) e(-x xi) dx`.
    fn fourier(&self, xi: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, -std::f64::consts::TAU * self.h * xi);
        let mut phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * (self.lo + self.h) * xi);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &v) in self.values.iter().enumerate() {
            if i % 256 == 0 {
                let x = self.lo + (i + 1) as f64 * self.h;
                phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * x * xi);
            }
            acc += v * phase;
            phase *= step;
        }
        acc * self.h
    }
}

/// Compares `sum_m V(m/M) e(a m / q)` with its Poisson dual
/// `M sum over h = -a (mod q) of hat V(h M / q)`.
pub fn poisson_check(window: &SmoothWindow, scale: f64, q: u64, a: i64) -> Result<PoissonReport, ExpsumError> {
    let (lo, hi) = window.support();
    if lo < 0.01 || hi > 100.0 {
        return Err(ExpsumError::Precondition(format!("window support [{lo}, {hi}] leaves [1/100, 100]")));
    }
    if q == 0 || scale <= 0.0 {
        return Err(ExpsumError::Precondition("modulus and scale must be positive".into()));
    }
    let first = (lo * scale).ceil() as i64;
    let last = (hi * scale).floor() as i64;
    let lhs: Complex64 = (first..=last)
        .map(|m| window.eval(m as f64 / scale) * e_frac(a as i128 * m as i128, q))
        .sum();

    let h0 = crate::arith::reduce_signed(-(a as i128), q) as i64;
    let qi = q as i64;
    let sampled = Sampled::new(window);
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut terms = 0usize;
    let threshold = 1e-14 / scale;
    for direction in [1i64, -1] {
        let mut quiet = 0usize;
        let mut j = if direction == 1 { 0 } else { -1 };
        while quiet < TAIL_RUN {
            let h = h0 + qi * j;
            let xi = h as f64 * scale / q as f64;
            if xi.abs() > sampled.nyquist() {
                break;
            }
            let v = sampled.fourier(xi);
            rhs += v;
            terms += 1;
            quiet = if v.norm() < threshold { quiet + 1 } else { 0 };
            j += direction;
        }
    }
    rhs *= scale;
    Ok(PoissonReport {
        lhs: (lhs.re, lhs.im),
        rhs: (rhs.re, rhs.im),
        discrepancy: (lhs - rhs).norm(),
        dual_terms: terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_and_twisted() {
        let w = SmoothWindow::bump(0.5, 2.0);
        for (m, q, a) in [(50.0, 1u64, 0i64), (100.0, 7, 3), (1000.0, 97, 5)] {
            let r = poisson_check(&w, m, q, a).unwrap();
            assert!(r.discrepancy < 1e-6, "M={m} q={q}: {r:?}");
        }
    }

    #[test]
    fn support_is_validated() {
        let w = SmoothWindow::bump(0.001, 2.0);
        assert!(poisson_check(&w, 10.0, 3, 1).is_err());
    }
}
