//! Registry of brute-vs-factored oracle pairs, bound checks and identities,
//! run over seeded grids and collected into a pass/fail ledger.

mod checks;

use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autcoeffs::{rankin_delta_delta_e4, sym3_delta, CoeffProvider};

pub use checks::SYM3_LIMIT;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown check id {0:?}")]
    UnknownCheck(String),
    #[error("unknown grid scale {0:?} (expected quick or full)")]
    Scale(String),
    #[error("check {id} could not run: {msg}")]
    Run { id: String, msg: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Quick,
    Full,
}

impl std::str::FromStr for GridScale {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quick" => Ok(GridScale::Quick),
            "full" => Ok(GridScale::Full),
            other => Err(VerifyError::Scale(other.to_string())),
        }
    }
}

impl GridScale {
    /// `quick` at quick scale, `full` otherwise.
    pub fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            GridScale::Quick => quick,
            GridScale::Full => full,
        }
    }
}

/// What a check measured.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub grid: String,
    pub cases: usize,
    /// Largest error, or largest excess over a bound (0 when within it).
    pub worst: f64,
    /// Smallest `bound - value` over bound checks.
    pub slack: Option<f64>,
    pub detail: Option<String>,
}

impl Outcome {
    pub fn new(grid: impl Into<String>) -> Self {
        Outcome { grid: grid.into(), ..Default::default() }
    }

    pub fn error(&mut self, e: f64) {
        self.cases += 1;
        if !(e <= self.worst) {
            self.worst = if e.is_nan() { f64::INFINITY } else { e };
        }
    }

    pub fn bound(&mut self, value: f64, bound: f64) {
        self.error((value - bound).max(0.0));
        let s = bound - value;
        self.slack = Some(self.slack.map_or(s, |m| m.min(s)));
    }

    /// Counts a boolean property; each failure adds 1 to `worst`.
    pub fn holds(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.worst += 1.0;
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.detail = Some(s.into());
    }
}

/// Shared inputs, built on first use.
pub struct Context {
    pub scale: GridScale,
    sym3: OnceLock<CoeffProvider>,
    rankin: OnceLock<CoeffProvider>,
}

impl Context {
    pub fn new(scale: GridScale) -> Self {
        Context { scale, sym3: OnceLock::new(), rankin: OnceLock::new() }
    }

    pub fn sym3(&self) -> &CoeffProvider {
        self.sym3.get_or_init(|| sym3_delta(SYM3_LIMIT))
    }

    pub fn rankin(&self) -> &CoeffProvider {
        self.rankin.get_or_init(|| rankin_delta_delta_e4(5000))
    }

    pub fn providers(&self) -> [&CoeffProvider; 2] {
        [self.sym3(), self.rankin()]
    }
}

type CheckFn = fn(&Context, &mut ChaCha8Rng) -> Result<Outcome, String>;

pub struct Check {
    pub id: &'static str,
    pub module: &'static str,
    /// Index of the module invariant this check establishes, if any.
    pub covers: Option<usize>,
    pub summary: &'static str,
    pub tolerance: f64,
    run: CheckFn,
}

/// Number of stated invariants per module.
pub const INVARIANT_COUNTS: [(&str, usize); 8] = [
    ("arith", 3),
    ("dirichlet", 4),
    ("expsums", 6),
    ("autcoeffs", 5),
    ("lfun", 5),
    ("moduli", 5),
    ("census", 4),
    ("verify", 1),
];

pub const BASE_SEED: u64 = 0x1f2e_3d4c_5b6a_7988;

pub fn registry() -> &'static [Check] {
    checks::REGISTRY
}

pub fn check_ids() -> Vec<&'static str> {
    registry().iter().map(|c| c.id).collect()
}

/// `(module, stated, covered)` for every module.
pub fn coverage() -> Vec<(&'static str, usize, usize)> {
    INVARIANT_COUNTS
        .iter()
        .map(|&(module, stated)| {
            let mut covered: Vec<usize> = registry().iter().filter(|c| c.module == module).filter_map(|c| c.covers).collect();
            covered.sort_unstable();
            covered.dedup();
            let within = covered.iter().filter(|&&i| i < stated).count();
            (module, stated, within)
        })
        .collect()
}

/// Per-check seed.
pub fn seed_for(id: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ BASE_SEED
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub module: String,
    pub summary: String,
    pub grid: String,
    pub seed: u64,
    pub cases: usize,
    pub worst_discrepancy: f64,
    pub tolerance: f64,
    pub bound_slack: Option<f64>,
    pub pass: bool,
    pub elapsed_ms: u128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ledger {
    pub scale: GridScale,
    pub base_seed: u64,
    pub results: Vec<CheckResult>,
    pub pass: bool,
}

impl Ledger {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.pass)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), VerifyError> {
        let text = serde_json::to_string_pretty(self).expect("ledger serializes");
        std::fs::write(path, text).map_err(|source| VerifyError::Io { path: path.display().to_string(), source })
    }
}

fn run_one(check: &Check, ctx: &Context) -> CheckResult {
    let seed = seed_for(check.id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let outcome = (check.run)(ctx, &mut rng);
    let elapsed_ms = start.elapsed().as_millis();
    let (outcome, error) = match outcome {
        Ok(o) => (o, None),
        Err(msg) => (Outcome { worst: f64::INFINITY, ..Outcome::new("not run") }, Some(msg)),
    };
    CheckResult {
        id: check.id.to_string(),
        module: check.module.to_string(),
        summary: check.summary.to_string(),
        grid: outcome.grid,
        seed,
        cases: outcome.cases,
        worst_discrepancy: outcome.worst,
        tolerance: check.tolerance,
        bound_slack: outcome.slack,
        pass: error.is_none() && outcome.worst <= check.tolerance,
        elapsed_ms,
        detail: error.or(outcome.detail),
    }
}

/// Runs the selected checks in parallel; results are ordered by id.
pub fn run_suite(selection: &[String], scale: GridScale) -> Result<Ledger, VerifyError> {
    let mut chosen: Vec<&Check> = Vec::new();
    for id in selection {
        let check = registry().iter().find(|c| c.id == id).ok_or_else(|| VerifyError::UnknownCheck(id.clone()))?;
        if !chosen.iter().any(|c| c.id == check.id) {
            chosen.push(check);
        }
    }
    let ctx = Context::new(scale);
    let mut results: Vec<CheckResult> = chosen.par_iter().map(|c| run_one(c, &ctx)).collect();
    results.sort_by(|a, b| a.id.cmp(&b.id));
    let pass = results.iter().all(|r| r.pass);
    Ok(Ledger { scale, base_seed: BASE_SEED, results, pass })
}

/// Every registered check.
pub fn run_all(scale: GridScale) -> Result<Ledger, VerifyError> {
    let ids: Vec<String> = check_ids().into_iter().map(String::from).collect();
    run_suite(&ids, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_invariant_is_covered() {
        for (module, stated, covered) in coverage() {
            assert_eq!(stated, covered, "module {module}");
        }
        let total: usize = INVARIANT_COUNTS.iter().map(|c| c.1).sum();
        assert_eq!(registry().iter().filter(|c| c.covers.is_some()).count(), total);
    }

    #[test]
    fn ids_are_unique_and_sorted_output() {
        let mut ids = check_ids();
        let n = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn empty_selection_passes() {
        let ledger = run_suite(&[], GridScale::Quick).unwrap();
        assert!(ledger.results.is_empty() && ledger.pass);
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(matches!(run_suite(&["no.such-check".into()], GridScale::Quick), Err(VerifyError::UnknownCheck(_))));
    }

    #[test]
    fn quick_suite_passes() {
        let ledger = run_all(GridScale::Quick).unwrap();
        for r in &ledger.results {
            println!("{:<40} {:>5} cases  worst {:.3e}  tol {:.0e}  {} ms  {}", r.id, r.cases, r.worst_discrepancy, r.tolerance, r.elapsed_ms, r.detail.as_deref().unwrap_or(""));
        }
        let failed: Vec<_> = ledger.failures().map(|r| (&r.id, r.worst_discrepancy, &r.detail)).collect();
        assert!(ledger.pass, "{failed:?}");
        assert!(ledger.results.windows(2).all(|w| w[0].id < w[1].id));
    }

    #[test]
    fn seeds_replay() {
        let a = run_suite(&["expsums.tk-multiplicativity".into()], GridScale::Quick).unwrap();
        let b = run_suite(&["expsums.tk-multiplicativity".into()], GridScale::Quick).unwrap();
        assert!(a.pass, "{:?}", a.results);
        assert_eq!(a.results[0].seed, b.results[0].seed);
        assert_eq!(a.results[0].worst_discrepancy, b.results[0].worst_discrepancy);
        assert_eq!(a.results[0].cases, b.results[0].cases);
    }
}
