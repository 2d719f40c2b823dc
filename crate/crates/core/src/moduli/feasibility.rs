use serde::Serialize;

const BIG: f64 = 1e9;

#[derive(Debug, Clone, Serialize)]
pub struct Constraint {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; positive means the strict inequality holds.
    pub slack: f64,
    pub holds: bool,
}

impl Constraint {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Constraint { name, lhs, rhs, slack: rhs - lhs, holds: lhs < rhs }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    /// `log(1/delta)`; delta itself may be far below the smallest double.
    pub log_inv_delta: f64,
    pub kappa: f64,
    pub c: f64,
    /// The two main inequalities are divided through by `delta`.
    pub constraints: Vec<Constraint>,
    pub feasible: bool,
}

/// Parameters measured in units of `delta`, so tiny `delta` stays representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledParameters {
    pub log_inv_delta: f64,
    pub nu_over_delta: f64,
    pub epsilon_over_delta: f64,
    pub kappa: f64,
    pub c: f64,
}

/// The two inequalities
/// `2e + (100 + k/2) v + (C + 1/2 + 10^9) d < (d/2) log(1/d)` and
/// `2e + (1 + 10^9 + C) d < (k/4) v`, the side conditions `k v < 10^3`,
/// `C d < 10^3`, and the ordering `0 < e <= d < v < 1/1000`.
pub fn parameter_feasibility_scaled(p: ScaledParameters) -> FeasibilityReport {
    let l = p.log_inv_delta;
    let ln_delta = -l;
    let ln_nu = ln_delta + p.nu_over_delta.ln();
    let first = Constraint::new(
        "master",
        2.0 * p.epsilon_over_delta + (100.0 + p.kappa / 2.0) * p.nu_over_delta + (p.c + 0.5 + BIG),
        0.5 * l,
    );
    let second = Constraint::new(
        "siegel-walfisz-level",
        2.0 * p.epsilon_over_delta + (1.0 + BIG + p.c),
        p.kappa / 4.0 * p.nu_over_delta,
    );
    // the side conditions and ordering are compared in log space
    let kappa_nu = Constraint::new("kappa-nu", p.kappa.ln() + ln_nu, 1e3f64.ln());
    let c_delta = Constraint::new("c-delta", p.c.ln() + ln_delta, 1e3f64.ln());
    let eps_le_delta = Constraint {
        name: "epsilon<=delta",
        lhs: p.epsilon_over_delta,
        rhs: 1.0,
        slack: 1.0 - p.epsilon_over_delta,
        holds: p.epsilon_over_delta > 0.0 && p.epsilon_over_delta <= 1.0,
    };
    let delta_lt_nu = Constraint::new("delta<nu", 1.0, p.nu_over_delta);
    let nu_small = Constraint::new("nu<1/1000", ln_nu, (1e-3f64).ln());
    let constraints = vec![first, second, kappa_nu, c_delta, eps_le_delta, delta_lt_nu, nu_small];
    let feasible = constraints.iter().all(|c| c.holds);
    FeasibilityReport { log_inv_delta: l, kappa: p.kappa, c: p.c, constraints, feasible }
}

pub fn parameter_feasibility(delta: f64, nu: f64, epsilon: f64, kappa: f64, c: f64) -> FeasibilityReport {
    assert!(delta > 0.0 && nu > 0.0 && epsilon > 0.0 && kappa > 0.0 && c > 0.0, "parameters must be positive");
    parameter_feasibility_scaled(ScaledParameters {
        log_inv_delta: -delta.ln(),
        nu_over_delta: nu / delta,
        epsilon_over_delta: epsilon / delta,
        kappa,
        c,
    })
}

/// The schema `epsilon = delta`, `nu = delta sqrt(log(1/delta))` at a given `log(1/delta)`.
pub fn schema_parameters(log_inv_delta: f64, kappa: f64, c: f64) -> ScaledParameters {
    ScaledParameters { log_inv_delta, nu_over_delta: log_inv_delta.sqrt(), epsilon_over_delta: 1.0, kappa, c }
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemaSearch {
    /// Smallest `log(1/delta)` found feasible, to bisection accuracy.
    pub threshold_log_inv_delta: f64,
    pub report: FeasibilityReport,
    pub steps: usize,
}

/// Bisects `log log(1/delta)` for the least feasible point of the schema.
pub fn find_schema_delta(kappa: f64, c: f64) -> Option<SchemaSearch> {
    let feasible = |ll: f64| parameter_feasibility_scaled(schema_parameters(ll.exp(), kappa, c)).feasible;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while !feasible(hi) {
        hi *= 2.0;
        if hi > 700.0 {
            return None;
        }
    }
    let mut steps = 0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    let report = parameter_feasibility_scaled(schema_parameters(hi.exp(), kappa, c));
    Some(SchemaSearch { threshold_log_inv_delta: hi.exp(), report, steps })
}

/// Unscaled slack of the master inequality with `epsilon = delta` and fixed `nu`,
/// as `delta` decreases.
pub fn degenerate_trend(nu: f64, kappa: f64, c: f64, deltas: &[f64]) -> Vec<(f64, f64, f64)> {
    deltas
        .iter()
        .map(|&d| {
            let r = parameter_feasibility(d, nu, d, kappa, c);
            (d, r.constraints[0].slack * d, r.constraints[1].slack * d)
        })
        .collect()
}
