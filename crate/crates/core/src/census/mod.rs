//! Central values over every primitive character of every modulus in a
//! moduli set, with parity filtering, aggregates and resumable shards.

mod output;
mod pipeline;
mod shards;

use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::gcd;
use crate::autcoeffs::CoeffProvider;
use crate::dirichlet::CharacterGroup;
use crate::lfun::{lvalues_for_modulus, AfeConfig, CoefficientTable, LStatus, LfunError};
use crate::moduli::{build_moduli, ModuliError, ModuliProfile, ModuliSet};

pub use output::{format_float, write_csv, CSV_HEADER};
pub use pipeline::{pipeline_shape_check, AblationStep, BandDiff, PipelineReport, SelectorCheck, PIPELINE_TOLERANCE};
pub use shards::{ShardHeader, ShardStore};

#[derive(Debug, Error)]
pub enum CensusError {
    #[error(transparent)]
    Moduli(#[from] ModuliError),
    #[error(transparent)]
    Lfun(#[from] LfunError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("shard {path}: {msg}")]
    Shard { path: PathBuf, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unknown parity selector {0:?} (expected even, odd or both)")]
    Parity(String),
}

/// Which characters enter the census.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Both,
}

impl Parity {
    pub fn admits(self, parity: i32) -> bool {
        match self {
            Parity::Even => parity == 1,
            Parity::Odd => parity == -1,
            Parity::Both => true,
        }
    }

    /// The `+-1` at which rows are weighted in the mean value.
    pub fn selector(self) -> i32 {
        match self {
            Parity::Odd => -1,
            Parity::Even | Parity::Both => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Both => "both",
        }
    }
}

impl FromStr for Parity {
    type Err = CensusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            "both" => Ok(Parity::Both),
            other => Err(CensusError::Parity(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Nonzero,
    Indeterminate,
    ZeroIsh,
    /// Not evaluated, see the row note.
    Skipped,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Nonzero => "nonzero",
            RowStatus::Indeterminate => "indeterminate",
            RowStatus::ZeroIsh => "zero-ish",
            RowStatus::Skipped => "skipped",
        }
    }
}

impl From<LStatus> for RowStatus {
    fn from(s: LStatus) -> Self {
        match s {
            LStatus::Nonzero => RowStatus::Nonzero,
            LStatus::Indeterminate => RowStatus::Indeterminate,
            LStatus::ZeroIsh => RowStatus::ZeroIsh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub q: u64,
    pub chi_id: usize,
    pub parity: i32,
    pub value: Complex64,
    pub root_number: Complex64,
    pub tail_est: f64,
    pub status: RowStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CensusRow {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub profile: ModuliProfile,
    pub parity: Parity,
    pub provider: String,
    pub moduli: Vec<u64>,
    pub rows: Vec<CensusRow>,
    pub mean_value: Complex64,
    pub count_nonzero: usize,
    pub count_indeterminate: usize,
    pub count_zeroish: usize,
    pub count_skipped: usize,
    pub min_nonzero_abs: Option<f64>,
    /// Shards loaded from a previous run instead of recomputed.
    pub shards_reused: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct CensusOptions {
    pub config: AfeConfig,
    /// Directory holding `q<q>.json` shards; `None` keeps everything in memory.
    pub run_dir: Option<PathBuf>,
}

/// Census with the default configuration and no shard directory.
pub fn run_census(provider: &CoeffProvider, profile: &ModuliProfile, parity: Parity, f: u64) -> Result<CensusReport, CensusError> {
    run_census_with(provider, profile, parity, f, &CensusOptions::default())
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Profile after folding in the extra coprimality modulus and the conductor.
pub fn effective_profile(provider: &CoeffProvider, profile: &ModuliProfile, f: u64) -> ModuliProfile {
    let mut p = profile.clone();
    p.f = lcm(p.f.max(1), f.max(1));
    p.conductor = lcm(p.conductor.max(1), provider.conductor());
    p
}

fn shard_rows(
    provider: &CoeffProvider,
    q: &crate::arith::Factored,
    config: &AfeConfig,
    coeffs: &CoefficientTable,
) -> Result<Vec<CensusRow>, CensusError> {
    let group = CharacterGroup::new(q).map_err(LfunError::from)?;
    match lvalues_for_modulus(provider, &group, config, coeffs) {
        Ok(values) => Ok(values
            .into_iter()
            .map(|v| CensusRow {
                q: v.q,
                chi_id: v.chi_id,
                parity: v.parity,
                value: v.value,
                root_number: v.root_number,
                tail_est: v.tail_est,
                status: v.status().into(),
                note: None,
            })
            .collect()),
        Err(LfunError::Coefficients { needed, available }) => Ok(group
            .primitive_characters()
            .map(|chi| CensusRow {
                q: q.value(),
                chi_id: chi.id(),
                parity: chi.parity(),
                value: Complex64::new(0.0, 0.0),
                root_number: Complex64::new(0.0, 0.0),
                tail_est: f64::INFINITY,
                status: RowStatus::Skipped,
                note: Some(format!("coefficients needed up to {needed}, available up to {available}")),
            })
            .collect()),
        Err(e) => Err(e.into()),
    }
}

fn lengths_needed(provider: &CoeffProvider, set: &ModuliSet, config: &AfeConfig) -> Result<usize, CensusError> {
    let mut needed = 1usize;
    for m in &set.members {
        let (a, b) = config.lengths(m.q, provider)?;
        needed = needed.max(a).max(b);
    }
    Ok(needed)
}

/// Largest `n` whose coefficient the census over `profile` reads. Depends on
/// the provider only through its conductor and gamma shifts.
pub fn coefficients_needed(provider: &CoeffProvider, profile: &ModuliProfile, f: u64, config: &AfeConfig) -> Result<usize, CensusError> {
    let set = build_moduli(&effective_profile(provider, profile, f))?;
    lengths_needed(provider, &set, config)
}

pub fn run_census_with(
    provider: &CoeffProvider,
    profile: &ModuliProfile,
    parity: Parity,
    f: u64,
    options: &CensusOptions,
) -> Result<CensusReport, CensusError> {
    let profile = effective_profile(provider, profile, f);
    let set = build_moduli(&profile)?;
    let config = options.config;
    let needed = lengths_needed(provider, &set, &config)?;
    let coeffs = match CoefficientTable::new(provider, needed) {
        Ok(c) => c,
        // rows beyond the covered range are marked skipped
        Err(LfunError::Coefficient(_)) => CoefficientTable::new(provider, (provider.coverage() as usize).min(needed))?,
        Err(e) => return Err(e.into()),
    };
    let store = match &options.run_dir {
        Some(dir) => Some(ShardStore::open(dir, provider, &coeffs, &config)?),
        None => None,
    };
    let shards: Vec<(Vec<CensusRow>, bool)> = set
        .members
        .par_iter()
        .map(|m| -> Result<(Vec<CensusRow>, bool), CensusError> {
            if let Some(store) = &store {
                if let Some(rows) = store.load(m.q)? {
                    return Ok((rows, true));
                }
            }
            let rows = shard_rows(provider, &m.factored, &config, &coeffs)?;
            if let Some(store) = &store {
                store.save(m.q, &rows)?;
            }
            Ok((rows, false))
        })
        .collect::<Result<_, _>>()?;
    let shards_reused = shards.iter().filter(|(_, reused)| *reused).count();
    let rows: Vec<CensusRow> = shards.into_iter().flat_map(|(rows, _)| rows).filter(|r| parity.admits(r.parity)).collect();
    let mut report = assemble(profile, parity, provider.name().to_string(), set.members.iter().map(|m| m.q).collect(), rows);
    report.shards_reused = shards_reused;
    Ok(report)
}

/// Builds the aggregates from rows sorted by `(q, chi_id)`.
pub fn assemble(profile: ModuliProfile, parity: Parity, provider: String, moduli: Vec<u64>, mut rows: Vec<CensusRow>) -> CensusReport {
    rows.sort_by_key(|r| (r.q, r.chi_id));
    let mut notes = Vec::new();
    if rows.is_empty() {
        notes.push(format!("no primitive characters of parity {} on this moduli set", parity.as_str()));
    }
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let min_nonzero_abs = rows
        .iter()
        .filter(|r| r.status == RowStatus::Nonzero)
        .map(CensusRow::abs)
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.min(a))));
    let mut report = CensusReport {
        profile,
        parity,
        provider,
        moduli,
        count_nonzero: count(RowStatus::Nonzero),
        count_indeterminate: count(RowStatus::Indeterminate),
        count_zeroish: count(RowStatus::ZeroIsh),
        count_skipped: count(RowStatus::Skipped),
        rows,
        mean_value: Complex64::new(0.0, 0.0),
        min_nonzero_abs,
        shards_reused: 0,
        notes,
    };
    if report.count_skipped > 0 {
        report.notes.push(format!("{} rows skipped for missing coefficients", report.count_skipped));
    }
    report.mean_value = mean_value(&report);
    report
}

/// `sum of chi(+-1) L(1/2, pi x chi)` over the evaluated rows.
pub fn mean_value(report: &CensusReport) -> Complex64 {
    let sign = report.parity.selector();
    report
        .rows
        .iter()
        .filter(|r| r.status != RowStatus::Skipped)
        .map(|r| if sign == 1 || r.parity == 1 { r.value } else { -r.value })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct NonvanishingSummary {
    pub rows: usize,
    pub nonzero: usize,
    pub indeterminate: usize,
    pub zeroish: usize,
    pub skipped: usize,
    pub nonzero_even: usize,
    pub nonzero_odd: usize,
    /// Distinct moduli carrying a nonzero row, increasing.
    pub nonzero_moduli: Vec<u64>,
    /// `(q, chi_id, |L|)` of rows needing follow-up.
    pub indeterminate_rows: Vec<(u64, usize, f64)>,
    pub min_nonzero_abs: Option<f64>,
}

pub fn nonvanishing_summary(report: &CensusReport) -> NonvanishingSummary {
    let nonzero: Vec<&CensusRow> = report.rows.iter().filter(|r| r.status == RowStatus::Nonzero).collect();
    let mut nonzero_moduli: Vec<u64> = nonzero.iter().map(|r| r.q).collect();
    nonzero_moduli.dedup();
    NonvanishingSummary {
        rows: report.rows.len(),
        nonzero: nonzero.len(),
        indeterminate: report.count_indeterminate,
        zeroish: report.count_zeroish,
        skipped: report.count_skipped,
        nonzero_even: nonzero.iter().filter(|r| r.parity == 1).count(),
        nonzero_odd: nonzero.iter().filter(|r| r.parity == -1).count(),
        nonzero_moduli,
        indeterminate_rows: report
            .rows
            .iter()
            .filter(|r| r.status == RowStatus::Indeterminate)
            .map(|r| (r.q, r.chi_id, r.abs()))
            .collect(),
        min_nonzero_abs: report.min_nonzero_abs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;
    use crate::autcoeffs::sym3_delta;
    use crate::dirichlet::primitive_count_formula;

    fn row(q: u64, chi_id: usize, parity: i32, value: Complex64) -> CensusRow {
        CensusRow {
            q,
            chi_id,
            parity,
            value,
            root_number: Complex64::new(1.0, 0.0),
            tail_est: 0.0,
            status: LStatus::of(value.norm()).into(),
            note: None,
        }
    }

    #[test]
    fn singleton_has_the_primitive_count() {
        let pi = sym3_delta(60_000);
        let report = run_census(&pi, &ModuliProfile::singleton_15(), Parity::Both, 1).unwrap();
        assert_eq!(report.moduli, vec![15]);
        assert_eq!(report.rows.len() as i64, primitive_count_formula(&factor(15)));
        assert_eq!(
            report.count_nonzero + report.count_indeterminate + report.count_zeroish + report.count_skipped,
            report.rows.len()
        );
        let resum: Complex64 = report.rows.iter().map(|r| r.value).sum();
        assert!((resum - report.mean_value).norm() < 1e-9);
    }

    #[test]
    fn odd_filter_on_even_only_set_is_empty() {
        let rows = vec![row(65, 3, 1, Complex64::new(0.5, 0.0))];
        let report = assemble(ModuliProfile::singleton_15(), Parity::Odd, "toy".into(), vec![65], rows.into_iter().filter(|r| Parity::Odd.admits(r.parity)).collect());
        assert!(report.rows.is_empty());
        assert_eq!(mean_value(&report), Complex64::new(0.0, 0.0));
        assert!(report.notes[0].contains("odd"));
    }

    #[test]
    fn coprimality_filter() {
        let pi = sym3_delta(10);
        let p = effective_profile(&pi, &ModuliProfile::desk(), 3);
        let set = build_moduli(&p).unwrap();
        assert!(set.members.iter().all(|m| m.q % 3 != 0));
    }

    #[test]
    fn aggregates() {
        let empty = assemble(ModuliProfile::desk(), Parity::Both, "toy".into(), vec![], vec![]);
        assert_eq!(mean_value(&empty), Complex64::new(0.0, 0.0));
        let v = Complex64::new(0.25, -0.5);
        let single = assemble(ModuliProfile::desk(), Parity::Even, "toy".into(), vec![7], vec![row(7, 2, 1, v)]);
        assert_eq!(mean_value(&single), v);
        let rows = vec![row(7, 1, -1, Complex64::new(0.3, 0.1)), row(7, 2, 1, v), row(5, 1, -1, Complex64::new(1e-4, 0.0))];
        let odd = assemble(ModuliProfile::desk(), Parity::Odd, "toy".into(), vec![5, 7], rows.into_iter().filter(|r| r.parity == -1).collect());
        assert!((odd.mean_value + Complex64::new(0.3001, 0.1)).norm() < 1e-12);
        let s = nonvanishing_summary(&odd);
        assert_eq!((s.nonzero, s.indeterminate, s.nonzero_odd), (1, 1, 1));
        assert_eq!(s.nonzero_moduli, vec![7]);
        assert_eq!(odd.rows[0].q, 5);
    }

    #[test]
    fn short_provider_marks_rows_skipped() {
        let pi = sym3_delta(5000);
        let report = run_census(&pi, &ModuliProfile::singleton_15(), Parity::Both, 1).unwrap();
        assert_eq!(report.count_skipped, report.rows.len());
        assert!(report.rows[0].note.as_deref().unwrap().contains("coefficients"));
        assert_eq!(report.mean_value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn parity_parsing() {
        assert_eq!("odd".parse::<Parity>().unwrap(), Parity::Odd);
        assert!("neither".parse::<Parity>().is_err());
    }
}
