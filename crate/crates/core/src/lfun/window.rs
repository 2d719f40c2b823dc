use std::fmt;
use std::sync::Arc;

use serde::Serialize;

type Callback = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// `exp(1 - 1/(1 - t^2))` on `t in (-1, 1)`, linear in `x`.
    Bump { lo: f64, hi: f64 },
    /// `S(u + 1) - S(u)` with `u = log2 x`.
    Partition,
    Custom(Callback),
}

/// `h(t) = exp(-1/t)` for `t > 0`.
fn h(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `u <= -1`, 1 for `u >= 1`.
fn step(u: f64) -> f64 {
    let a = h(u + 1.0);
    let b = h(1.0 - u);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// A smooth compactly supported weight with its `sup` norms.
#[derive(Clone)]
pub struct SmoothWindow {
    shape: Shape,
    lo: f64,
    hi: f64,
    norms: [f64; 3],
}

impl fmt::Debug for SmoothWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.shape {
            Shape::Bump { .. } => "bump",
            Shape::Partition => "partition",
            Shape::Custom(_) => "custom",
        };
        f.debug_struct("SmoothWindow").field("kind", &kind).field("support", &(self.lo, self.hi)).field("norms", &self.norms).finish()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowNorms {
    pub sup: f64,
    pub sup_d1: f64,
    pub sup_d2: f64,
    /// `|V|_inf + |V'|_inf + |V''|_inf`.
    pub combined: f64,
}

const NORM_SAMPLES: usize = 20_000;

impl SmoothWindow {
    fn with_shape(shape: Shape, lo: f64, hi: f64) -> Self {
        let mut w = SmoothWindow { shape, lo, hi, norms: [0.0; 3] };
        w.norms = w.sample_norms();
        w
    }

    /// Smooth bump supported on `[lo, hi]`, equal to 1 at the midpoint.
    pub fn bump(lo: f64, hi: f64) -> Self {
        assert!(0.0 < lo && lo < hi, "bump needs 0 < lo < hi");
        Self::with_shape(Shape::Bump { lo, hi }, lo, hi)
    }

    /// Dyadic partition generator: `sum_j V(x / 2^j) = 1` for `x >= 1`,
    /// support `(1/4, 2)`.
    pub fn partition() -> Self {
        Self::with_shape(Shape::Partition, 0.25, 2.0)
    }

    /// Arbitrary callback; the caller vouches for smoothness and support.
    pub fn custom(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::with_shape(Shape::Custom(Arc::new(f)), lo, hi)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        match &self.shape {
            Shape::Bump { lo, hi } => {
                let t = (2.0 * x - lo - hi) / (hi - lo);
                let d = 1.0 - t * t;
                if d <= 0.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / d).exp()
                }
            }
            Shape::Partition => {
                let u = x.log2();
                step(u + 1.0) - step(u)
            }
            Shape::Custom(f) => f(x),
        }
    }

    fn sample_norms(&self) -> [f64; 3] {
        let dx = (self.hi - self.lo) / NORM_SAMPLES as f64;
        let vals: Vec<f64> = (0..=NORM_SAMPLES).map(|i| self.eval(self.lo + i as f64 * dx)).collect();
        let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let d1 = vals.windows(2).map(|w| ((w[1] - w[0]) / dx).abs()).fold(0.0, f64::max);
        let d2 = vals.windows(3).map(|w| ((w[2] - 2.0 * w[1] + w[0]) / (dx * dx)).abs()).fold(0.0, f64::max);
        [sup, d1, d2]
    }

    pub fn norms(&self) -> WindowNorms {
        let [sup, sup_d1, sup_d2] = self.norms;
        WindowNorms { sup, sup_d1, sup_d2, combined: sup + sup_d1 + sup_d2 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartitionReport {
    pub max_deviation: f64,
    pub worst_x: f64,
    pub samples: usize,
}

/// `max |sum_{j >= 0} V(x / 2^j) - 1|` over a log-spaced grid on `[1, 10^6]`
/// plus the dyadic points and their geometric midpoints.
pub fn partition_check(window: &SmoothWindow) -> PartitionReport {
    let mut xs: Vec<f64> = (0..=60_000).map(|i| 10f64.powf(6.0 * i as f64 / 60_000.0)).collect();
    for j in 0..20 {
        let n = 2f64.powi(j);
        xs.push(n);
        xs.push(n * std::f64::consts::SQRT_2);
    }
    xs.push(1000.0 * std::f64::consts::SQRT_2);
    let mut worst = (0.0, 1.0);
    for &x in &xs {
        let mut total = 0.0;
        let mut n = 1.0;
        while n <= 4.0 * x {
            total += window.eval(x / n);
            n *= 2.0;
        }
        let dev = (total - 1.0).abs();
        if dev > worst.0 {
            worst = (dev, x);
        }
    }
    PartitionReport { max_deviation: worst.0, worst_x: worst.1, samples: xs.len() }
}
