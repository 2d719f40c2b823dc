use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use charsum_core::arith::{factorize, is_prime};
use charsum_core::autcoeffs::{file_provider, rankin_delta_delta_e4, sym3_delta, CoeffProvider};
use charsum_core::census::{coefficients_needed, format_float, nonvanishing_summary, run_census_with, write_csv, CensusOptions, Parity};
use charsum_core::dirichlet::CharacterGroup;
use charsum_core::expsums::{
    e_pi_transform_character_side, e_pi_transform_formula, hyper_kloosterman_with, kk_brute, kk_factored, t_k_brute,
    t_k_fast, KKParams, KloostermanMethod, KK_BRUTE_BUDGET, NESTED_BUDGET, T_BRUTE_BUDGET,
};
use charsum_core::lfun::{lvalues_for_modulus, AfeConfig, CoefficientTable, TwistedLValue};
use charsum_core::moduli::{build_moduli, ModuliProfile};
use charsum_core::verify::{check_ids, run_suite, GridScale};

/// Tolerance for `expsum --check-factored`.
const FACTORED_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "charsum-lab", version, about = "Character sums, twisted L-values and their census")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one exponential sum, with its brute-force counterpart when affordable.
    Expsum(ExpsumArgs),
    /// Central values L(1/2, pi x chi) for primitive characters mod q.
    Lvalue(LvalueArgs),
    /// List the members of a moduli profile.
    Moduli(ModuliArgs),
    /// Non-vanishing census over a moduli set.
    Census(CensusArgs),
    /// Run the oracle and property checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tk,
    Kk,
    Hk,
    Epi,
}

#[derive(clap::Args)]
struct ExpsumArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 4)]
    k: u32,
    /// q for tk and epi, the prime p for hk.
    #[arg(long)]
    modulus: Option<u64>,
    /// l for tk and kk, u for hk, m for epi.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    ell: i64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    v1: i64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    v2: i64,
    /// kk only.
    #[arg(long, default_value_t = 1)]
    r: u64,
    #[arg(long, default_value_t = 1)]
    s1: u64,
    #[arg(long, default_value_t = 1)]
    s2: u64,
    /// epi only.
    #[arg(long, default_value = "sym3-delta")]
    pi: String,
    /// Fail unless the brute value is available and agrees.
    #[arg(long)]
    check_factored: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct LvalueArgs {
    /// `sym3-delta`, `rankin-delta-e4`, or a coefficient file.
    #[arg(long, default_value = "sym3-delta")]
    pi: String,
    #[arg(long)]
    q: u64,
    /// Character index (mixed-radix id).
    #[arg(long, conflicts_with = "all_primitive")]
    chi: Option<usize>,
    #[arg(long)]
    all_primitive: bool,
    #[arg(long, value_enum, default_value = "json")]
    out: Format,
}

#[derive(clap::Args)]
struct ModuliArgs {
    /// TOML file, or one of `desk`, `singleton-15`, `pair-15-21`.
    #[arg(long)]
    profile: String,
}

#[derive(clap::Args)]
struct CensusArgs {
    #[arg(long, default_value = "sym3-delta")]
    pi: String,
    /// TOML file, or one of `desk`, `singleton-15`, `pair-15-21`.
    #[arg(long, default_value = "desk")]
    profile: String,
    #[arg(long, default_value = "both")]
    parity: Parity,
    #[arg(long, default_value_t = 1)]
    coprime_to: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep per-modulus shards under `<runs-dir>/<id>` and reuse them.
    #[arg(long)]
    run_id: Option<String>,
    #[arg(long, default_value = "runs")]
    runs_dir: PathBuf,
    /// Exit with status 1 unless every requested parity has a nonzero row.
    #[arg(long)]
    expect_nonvanishing: bool,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value = "quick")]
    suite: GridScale,
    /// Check ids, comma separated or repeated; all checks when absent.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Print the registered ids and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Expsum(a) => expsum(a),
        Command::Lvalue(a) => lvalue(a),
        Command::Moduli(a) => moduli(a),
        Command::Census(a) => census(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// Builds the named provider with coefficients up to whatever `need` asks of it.
fn load_provider(spec: &str, need: impl Fn(&CoeffProvider) -> Result<usize>) -> Result<CoeffProvider> {
    match spec {
        "sym3-delta" => Ok(sym3_delta(need(&sym3_delta(2))?.max(2))),
        "rankin-delta-e4" => Ok(rankin_delta_delta_e4(need(&rankin_delta_delta_e4(2))?.max(2))),
        path => file_provider(path).with_context(|| format!("reading coefficient file {path}")),
    }
}

fn load_profile(spec: &str) -> Result<ModuliProfile> {
    match spec {
        "desk" => Ok(ModuliProfile::desk()),
        "singleton-15" => Ok(ModuliProfile::singleton_15()),
        "pair-15-21" => Ok(ModuliProfile::pair_15_21()),
        path => ModuliProfile::load(path).with_context(|| format!("reading profile {path}")),
    }
}

fn expsum(a: ExpsumArgs) -> Result<bool> {
    let modulus = || a.modulus.context("--modulus is required for this kind");
    let (value, brute): (Complex64, Option<Complex64>) = match a.kind {
        Kind::Tk => {
            let q = factorize(modulus()?)?;
            let brute = if q.value() <= T_BRUTE_BUDGET { Some(t_k_brute(a.ell, &q, a.k)?.value) } else { None };
            (t_k_fast(a.ell, &q, a.k), brute)
        }
        Kind::Kk => {
            let params = KKParams::new(a.v1, a.v2, a.ell, factorize(a.r)?, factorize(a.s1)?, factorize(a.s2)?)?;
            let brute = if params.total_modulus() <= KK_BRUTE_BUDGET { Some(kk_brute(&params, a.k)?) } else { None };
            (kk_factored(&params, a.k)?, brute)
        }
        Kind::Hk => {
            let p = modulus()?;
            if !is_prime(p) {
                bail!("--modulus must be prime for hk, got {p}");
            }
            let nested_size = (p as f64).powi(a.k as i32 - 1);
            let brute = if nested_size <= NESTED_BUDGET as f64 {
                Some(hyper_kloosterman_with(a.ell, p, a.k, KloostermanMethod::Nested)?)
            } else {
                None
            };
            (hyper_kloosterman_with(a.ell, p, a.k, KloostermanMethod::Convolution)?, brute)
        }
        Kind::Epi => {
            let q = factorize(modulus()?)?;
            let provider = load_provider(&a.pi, |_| Ok(2))?;
            (e_pi_transform_formula(a.ell, &q, &provider)?, Some(e_pi_transform_character_side(a.ell, &q, &provider)?))
        }
    };
    let discrepancy = brute.map(|b| (b - value).norm());
    let out = json!({
        "value_re": value.re,
        "value_im": value.im,
        "brute_value": brute.map(complex_json),
        "discrepancy": discrepancy,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    if a.check_factored {
        let tolerance = match a.kind {
            Kind::Epi => 1e-6 * a.modulus.unwrap_or(1) as f64,
            Kind::Kk => 1e-7,
            _ => FACTORED_TOLERANCE,
        };
        return match discrepancy {
            None => bail!("no brute-force value within budget to check against"),
            Some(d) => Ok(d <= tolerance),
        };
    }
    Ok(true)
}

const LVALUE_COLUMNS: [&str; 10] = ["q", "chi_index", "parity", "re", "im", "abs", "eps_re", "eps_im", "tail_est", "status"];

fn lvalue(a: LvalueArgs) -> Result<bool> {
    if a.chi.is_none() && !a.all_primitive {
        bail!("pass --chi <index> or --all-primitive");
    }
    let config = AfeConfig::default();
    let provider = load_provider(&a.pi, |p| {
        let (f, d) = config.lengths(a.q, p)?;
        Ok(f.max(d))
    })?;
    let (f, d) = config.lengths(a.q, &provider)?;
    let coeffs = CoefficientTable::new(&provider, f.max(d))?;
    let group = CharacterGroup::from_modulus(a.q)?;
    let mut rows = lvalues_for_modulus(&provider, &group, &config, &coeffs)?;
    if let Some(id) = a.chi {
        if id >= group.order() {
            bail!("character index {id} out of range for a group of order {}", group.order());
        }
        if !group.is_primitive_id(id) {
            bail!("character {id} mod {} is not primitive", a.q);
        }
        rows.retain(|r| r.chi_id == id);
    }
    let fields = |r: &TwistedLValue| {
        [
            r.q.to_string(),
            r.chi_id.to_string(),
            r.parity.to_string(),
            format_float(r.value.re),
            format_float(r.value.im),
            format_float(r.abs()),
            format_float(r.root_number.re),
            format_float(r.root_number.im),
            format_float(r.tail_est),
            r.status().as_str().to_string(),
        ]
    };
    let stdout = io::stdout();
    let mut w = stdout.lock();
    match a.out {
        Format::Csv => {
            writeln!(w, "{}", LVALUE_COLUMNS.join(","))?;
            for r in &rows {
                writeln!(w, "{}", fields(r).join(","))?;
            }
        }
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "q": r.q,
                        "chi_index": r.chi_id,
                        "parity": r.parity,
                        "re": r.value.re,
                        "im": r.value.im,
                        "abs": r.abs(),
                        "eps_re": r.root_number.re,
                        "eps_im": r.root_number.im,
                        "tail_est": r.tail_est,
                        "status": r.status().as_str(),
                    })
                })
                .collect();
            writeln!(w, "{}", serde_json::to_string_pretty(&list)?)?;
        }
    }
    Ok(true)
}

fn moduli(a: ModuliArgs) -> Result<bool> {
    let profile = load_profile(&a.profile)?;
    let set = build_moduli(&profile)?;
    println!("{}", serde_json::to_string_pretty(&set)?);
    Ok(true)
}

fn census(a: CensusArgs) -> Result<bool> {
    let profile = load_profile(&a.profile)?;
    let options = CensusOptions { run_dir: a.run_id.as_ref().map(|id| a.runs_dir.join(id)), ..Default::default() };
    let provider = load_provider(&a.pi, |p| Ok(coefficients_needed(p, &profile, a.coprime_to, &options.config)?))?;
    let report = run_census_with(&provider, &profile, a.parity, a.coprime_to, &options)?;
    match &a.out {
        Some(path) => write_csv_file(&report, path)?,
        None => write_csv(&report, io::stdout().lock())?,
    }
    let summary = nonvanishing_summary(&report);
    let out = json!({
        "provider": report.provider,
        "parity": report.parity.as_str(),
        "moduli": report.moduli,
        "mean_value": complex_json(report.mean_value),
        "summary": summary,
        "shards_reused": report.shards_reused,
        "notes": report.notes,
    });
    eprintln!("{}", serde_json::to_string_pretty(&out)?);
    let found = match a.parity {
        Parity::Even => summary.nonzero_even > 0,
        Parity::Odd => summary.nonzero_odd > 0,
        Parity::Both => summary.nonzero_even > 0 && summary.nonzero_odd > 0,
    };
    Ok(!a.expect_nonvanishing || found)
}

fn write_csv_file(report: &charsum_core::census::CensusReport, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_csv(report, &mut w)?;
    w.flush()?;
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<bool> {
    if a.list {
        for id in check_ids() {
            println!("{id}");
        }
        return Ok(true);
    }
    let selection: Vec<String> = if a.only.is_empty() { check_ids().into_iter().map(String::from).collect() } else { a.only };
    let ledger = run_suite(&selection, a.suite)?;
    for r in &ledger.results {
        let mark = if r.pass { "PASS" } else { "FAIL" };
        println!("{mark} {:<40} cases={:<7} worst={:.3e} tol={:.0e}", r.id, r.cases, r.worst_discrepancy, r.tolerance);
        if let (false, Some(d)) = (r.pass, &r.detail) {
            println!("     {d}");
        }
    }
    if let Some(path) = &a.ledger {
        ledger.write_json(path)?;
    }
    let failed = ledger.failures().count();
    println!("{} checks, {} failed", ledger.results.len(), failed);
    Ok(ledger.pass)
}
