use std::f64::consts::PI;

use num_complex::Complex64;

/// Bernoulli coefficients `B_{2k} / (2k (2k-1))` of the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const SHIFT: f64 = 12.0;

/// `log Gamma(z)` for `Re z > 0`, up to a multiple of `2 pi i` in the imaginary part.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < SHIFT {
        acc -= z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv;
    for c in STIRLING {
        series += power * c;
        power *= inv2;
    }
    acc + (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series
}

/// `log Gamma_R(s) = -(s/2) log pi + log Gamma(s/2)`.
pub fn ln_gamma_r(s: Complex64) -> Complex64 {
    -0.5 * s * PI.ln() + ln_gamma(s * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_values() {
        let g = |x: f64| ln_gamma(Complex64::new(x, 0.0)).re;
        assert!((g(1.0)).abs() < 1e-14);
        assert!((g(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((g(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        assert!((g(100.0) - 359.134_205_369_575_4).abs() < 1e-10);
    }

    #[test]
    fn recurrence_and_reflection() {
        let z = Complex64::new(0.3, 2.7);
        let lhs = ln_gamma(z + 1.0).exp();
        let rhs = z * ln_gamma(z).exp();
        assert!((lhs - rhs).norm() < 1e-13 * rhs.norm());
        // |Gamma(1/2 + it)|^2 = pi / cosh(pi t)
        for t in [0.5, 3.0, 10.0] {
            let v = ln_gamma(Complex64::new(0.5, t)).exp().norm_sqr();
            let expect = PI / (PI * t).cosh();
            assert!((v - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn gamma_r_duplication() {
        // Gamma_R(s) Gamma_R(s+1) = Gamma_C(s) = 2 (2 pi)^{-s} Gamma(s)
        let s = Complex64::new(2.25, -1.5);
        let lhs = ln_gamma_r(s) + ln_gamma_r(s + 1.0);
        let rhs = 2f64.ln() - s * (2.0 * PI).ln() + ln_gamma(s);
        assert!((lhs.exp() - rhs.exp()).norm() < 1e-12 * rhs.exp().norm());
    }
}
