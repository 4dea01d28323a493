//! Command-line driver.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use super::apply::{run_apply, ApplySettings};
use super::config::{Options, SeriesKind};
use super::ingest::{ingest_prices, read_series, write_series, ColumnSpec, InputKind};
use crate::bootstrap::{bootstrap_ci, BootstrapCI, BootstrapScheme, CiMethod, CiRequest};
use crate::error::{Error, Result};
use crate::estimators::{sweep, AlphaPolicy};
use crate::rng;
use crate::simulators::{simulate, SimulationPlan, DEFAULT_BURN_IN};
use crate::study::{
    independence_quantile, independence_reference, oracle_table, study_coverage, study_estimators,
    CoverageStudy, EstimatorStudy, OracleSpec, SchemeFamily, SchemeSpec, StudyReport,
};
use crate::window::{resolve_threshold, Conditioning, EstimatorKind, SeriesWindow};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "spectail", version, about = "Spectral tail process estimation for heavy-tailed series")]
pub struct Cli {
    /// TOML file with option defaults (same names as the flags)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a model path to series.csv
    Simulate(Options),
    /// Forward or backward estimates over lags and a grid of x
    Estimate(Options),
    /// Bootstrap confidence intervals
    Ci(Options),
    /// Bias, sd and RMSE of both estimators against the oracle truth
    StudyRmse(Options),
    /// Coverage of bootstrap intervals against the oracle truth
    StudyCoverage(Options),
    /// Full analysis of a return series with model comparison
    Apply(Options),
    /// References under serial independence
    Independence(Options),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Estimate(_) => "estimate",
            Command::Ci(_) => "ci",
            Command::StudyRmse(_) => "study-rmse",
            Command::StudyCoverage(_) => "study-coverage",
            Command::Apply(_) => "apply",
            Command::Independence(_) => "independence",
        }
    }

    fn options(&self) -> &Options {
        match self {
            Command::Simulate(o)
            | Command::Estimate(o)
            | Command::Ci(o)
            | Command::StudyRmse(o)
            | Command::StudyCoverage(o)
            | Command::Apply(o)
            | Command::Independence(o) => o,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config_file: String,
    pub outputs: Vec<String>,
    pub created: String,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

/// Parses arguments, runs the command and returns the process exit status:
/// 0 on success, 1 on a run error (with JSON on stderr and in
/// `error.json`), 2 on a usage error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(_) => 0,
        Err(e) => {
            let report = ErrorReport {
                error: e.kind(),
                message: e.to_string(),
            };
            let json = serde_json::to_string_pretty(&report).unwrap_or_default();
            eprintln!("{json}");
            if std::fs::create_dir_all(&cli.out).is_ok() {
                let _ = std::fs::write(cli.out.join("error.json"), json + "\n");
            }
            1
        }
    }
}

/// Runs a parsed command and returns the manifest it wrote.
pub fn run(cli: &Cli) -> Result<Manifest> {
    let file = match &cli.config {
        Some(p) => Options::load(p)?,
        None => Options::default(),
    };
    let mut opts = file.overlay(cli.command.options().clone())?;
    let seed = *opts.seed.get_or_insert(DEFAULT_SEED);
    std::fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    let outputs = match &cli.command {
        Command::Simulate(_) => cmd_simulate(&opts, seed, out)?,
        Command::Estimate(_) => cmd_estimate(&opts, out)?,
        Command::Ci(_) => cmd_ci(&opts, seed, out)?,
        Command::StudyRmse(_) => cmd_study_rmse(&opts, seed, out)?,
        Command::StudyCoverage(_) => cmd_study_coverage(&opts, seed, out)?,
        Command::Apply(_) => cmd_apply(&opts, seed, out)?,
        Command::Independence(_) => cmd_independence(&opts, seed, out)?,
    };
    let toml = opts.to_toml()?;
    std::fs::write(out.join("config.toml"), &toml)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        seed,
        config_hash: opts.hash()?,
        config_file: "config.toml".into(),
        outputs,
        created: chrono::Utc::now().to_rfc3339(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn load_input(opts: &Options) -> Result<Vec<f64>> {
    let path = opts
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("--input is required".into()))?;
    match opts.input_kind.unwrap_or(SeriesKind::Value) {
        SeriesKind::Value => read_series(path),
        SeriesKind::Price => Ok(ingest_prices(path, &ColumnSpec::for_kind(InputKind::Price))?.returns),
        SeriesKind::Return => Ok(ingest_prices(path, &ColumnSpec::for_kind(InputKind::Return))?.returns),
    }
}

fn max_abs_lag(lags: &[i64]) -> usize {
    lags.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(1)
}

fn single_estimator(opts: &Options, default: &str) -> Result<EstimatorKind> {
    match opts.estimators_or(default)?.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::InvalidInput("exactly one estimator is expected here".into())),
    }
}

fn cmd_simulate(opts: &Options, seed: u64, out: &Path) -> Result<Vec<String>> {
    let plan = SimulationPlan {
        model: opts.model_or("garch-t4")?,
        length: opts.length.unwrap_or(2000),
        burn_in: opts.burn_in.unwrap_or(DEFAULT_BURN_IN),
        seed,
    };
    let x = simulate(&plan)?;
    write_series(&out.join("series.csv"), &x)?;
    Ok(vec!["series.csv".into()])
}

#[derive(Serialize)]
struct EstimateRow {
    estimator: EstimatorKind,
    conditioning: Conditioning,
    lag: i64,
    x: f64,
    value: f64,
    exceedance_count: usize,
    threshold: f64,
    alpha: Option<f64>,
}

fn cmd_estimate(opts: &Options, out: &Path) -> Result<Vec<String>> {
    let lags = opts.lags_or("1")?;
    let grid = opts.grid_or("-2,-1,0,1,2")?;
    let estimator = single_estimator(opts, "forward")?;
    let conditioning = opts.conditioning_or(Conditioning::Absolute)?;
    let w = SeriesWindow::new(load_input(opts)?, max_abs_lag(&lags))?;
    let u = resolve_threshold(&w, opts.threshold(0.95))?;
    let policy = opts.alpha.map_or(AlphaPolicy::Hill, AlphaPolicy::Fixed);
    let mut curve = sweep(&w, u, estimator, conditioning, &lags, &grid, policy)?;
    if opts.clamp == Some(true) {
        for c in &mut curve.cells {
            c.value = c.value.clamp(0.0, 1.0);
        }
    }
    let rows: Vec<EstimateRow> = curve
        .cells
        .iter()
        .map(|c| EstimateRow {
            estimator: c.estimator,
            conditioning: c.conditioning,
            lag: c.lag,
            x: c.x,
            value: c.value,
            exceedance_count: c.exceedance_count,
            threshold: curve.threshold,
            alpha: c.alpha_used,
        })
        .collect();
    write_csv(&out.join("estimate.csv"), &rows)?;
    write_json(&out.join("estimate.json"), &curve)?;
    Ok(vec!["estimate.csv".into(), "estimate.json".into()])
}

pub(crate) fn scheme_from(opts: &Options, block: usize, replicates: usize, seed: u64) -> Result<BootstrapScheme> {
    let family = match opts.scheme.as_deref().unwrap_or("multiplier") {
        "multiplier" => SchemeFamily::Multiplier,
        "stationary" => SchemeFamily::Stationary,
        other => return Err(Error::InvalidInput(format!("unknown scheme `{other}`"))),
    };
    Ok(SchemeSpec { kind: family, block }.scheme(replicates, seed))
}

#[derive(Serialize)]
pub(crate) struct CiRow {
    pub target: String,
    pub x: f64,
    pub lag: i64,
    pub estimator: EstimatorKind,
    pub conditioning: Conditioning,
    pub scheme: String,
    pub block: f64,
    pub level: f64,
    pub method: String,
    pub estimate: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub replicates_used: Option<usize>,
    pub discarded: Option<usize>,
    pub error: Option<String>,
}

impl CiRow {
    pub(crate) fn from_result(req: &CiRequest, result: &Result<BootstrapCI>) -> Self {
        let (method, estimate, lower, upper, used, discarded, error) = match result {
            Ok(ci) => (
                match ci.method {
                    CiMethod::Reflected => "reflected",
                    CiMethod::Rescaled { .. } => "rescaled",
                },
                Some(ci.point_estimate),
                Some(ci.lower),
                Some(ci.upper),
                Some(ci.replicates_used),
                Some(ci.discarded),
                None,
            ),
            Err(e) => (
                if req.rescale_from.is_some() { "rescaled" } else { "reflected" },
                None,
                None,
                None,
                None,
                None,
                Some(e.kind().to_string()),
            ),
        };
        CiRow {
            target: req.functional.label(),
            x: req.functional.x(),
            lag: req.lag,
            estimator: req.estimator,
            conditioning: req.conditioning,
            scheme: req.scheme.label().into(),
            block: req.scheme.block(),
            level: req.level,
            method: method.into(),
            estimate,
            lower,
            upper,
            replicates_used: used,
            discarded,
            error,
        }
    }
}

fn cmd_ci(opts: &Options, seed: u64, out: &Path) -> Result<Vec<String>> {
    let lags = opts.lags_or("1")?;
    let targets = opts.targets("abs-exceeds", "1")?;
    let estimator = single_estimator(opts, "backward")?;
    let conditioning = opts.conditioning_or(Conditioning::Absolute)?;
    let block = *opts.blocks_or("100")?.first().expect("non-empty");
    let replicates = opts.replicates.unwrap_or(300);
    let level = opts.level.unwrap_or(0.95);
    let w = SeriesWindow::new(load_input(opts)?, max_abs_lag(&lags))?;
    let mut rows = Vec::new();
    let mut cis = Vec::new();
    let mut idx = 0u64;
    for &lag in &lags {
        for &functional in &targets {
            let req = CiRequest {
                threshold: opts.threshold(0.95),
                lag,
                functional,
                estimator,
                conditioning,
                scheme: scheme_from(opts, block, replicates, rng::derive_seed(seed, idx))?,
                level,
                rescale_from: opts.rescale_from.map(crate::window::ThresholdSpec::Quantile),
                keep_draws: false,
            };
            idx += 1;
            let result = bootstrap_ci(&w, &req);
            rows.push(CiRow::from_result(&req, &result));
            if let Ok(ci) = result {
                cis.push(ci);
            }
        }
    }
    write_csv(&out.join("ci.csv"), &rows)?;
    write_json(&out.join("ci.json"), &cis)?;
    Ok(vec!["ci.csv".into(), "ci.json".into()])
}

fn oracle_spec(opts: &Options, seed: u64, lags: Vec<i64>, functionals: Vec<crate::window::TailFunctional>) -> Result<OracleSpec> {
    let mut spec = OracleSpec::new(opts.model_or("garch-t4")?, opts.threshold_quantile.unwrap_or(0.95), lags, functionals);
    spec.replicates = opts.oracle_replicates.unwrap_or(spec.replicates);
    spec.length = opts.oracle_length.unwrap_or(spec.length);
    spec.threshold_mode = opts.oracle_threshold_mode()?;
    spec.burn_in = opts.burn_in.unwrap_or(DEFAULT_BURN_IN);
    spec.seed = rng::derive_seed(seed, u64::MAX);
    Ok(spec)
}

fn study_quantile(opts: &Options) -> Result<f64> {
    if opts.threshold_level.is_some() {
        return Err(Error::InvalidInput("studies take --threshold-quantile, not a level".into()));
    }
    Ok(opts.threshold_quantile.unwrap_or(0.95))
}

fn write_report(report: &StudyReport, out: &Path, stem: &str) -> Result<Vec<String>> {
    report.write_csv(&out.join(format!("{stem}.csv")))?;
    report.write_json(&out.join(format!("{stem}.json")))?;
    Ok(vec![format!("{stem}.csv"), format!("{stem}.json")])
}

fn cmd_study_rmse(opts: &Options, seed: u64, out: &Path) -> Result<Vec<String>> {
    let q = study_quantile(opts)?;
    let lags = opts.lags_or("1")?;
    let functionals = opts.targets("cdf", "-2,-1,1,2")?;
    let oracle = oracle_table(&oracle_spec(opts, seed, lags.clone(), functionals.clone())?)?;
    write_json(&out.join("oracle.json"), &oracle)?;
    let cfg = EstimatorStudy {
        model: opts.model_or("garch-t4")?,
        n: opts.n.unwrap_or(2000),
        quantile: q,
        lags,
        functionals,
        reps: opts.reps.unwrap_or(300),
        burn_in: opts.burn_in.unwrap_or(DEFAULT_BURN_IN),
        seed,
    };
    let report = study_estimators(&cfg, &oracle)?;
    let mut files = vec!["oracle.json".to_string()];
    files.extend(write_report(&report, out, "study_rmse")?);
    Ok(files)
}

fn cmd_study_coverage(opts: &Options, seed: u64, out: &Path) -> Result<Vec<String>> {
    let q = study_quantile(opts)?;
    let lags = opts.lags_or("1..5")?;
    let functionals = opts.targets("abs-exceeds", "1")?;
    let families: Vec<SchemeFamily> = opts
        .scheme
        .as_deref()
        .unwrap_or("multiplier")
        .split(',')
        .map(|s| match s.trim() {
            "multiplier" => Ok(SchemeFamily::Multiplier),
            "stationary" => Ok(SchemeFamily::Stationary),
            other => Err(Error::InvalidInput(format!("unknown scheme `{other}`"))),
        })
        .collect::<Result<_>>()?;
    let blocks = opts.blocks_or("100")?;
    let schemes: Vec<SchemeSpec> = families
        .iter()
        .flat_map(|&kind| blocks.iter().map(move |&block| SchemeSpec { kind, block }))
        .collect();
    let oracle = oracle_table(&oracle_spec(opts, seed, lags.clone(), functionals.clone())?)?;
    write_json(&out.join("oracle.json"), &oracle)?;
    let mut combined: Option<StudyReport> = None;
    for (i, &functional) in functionals.iter().enumerate() {
        let cfg = CoverageStudy {
            model: opts.model_or("garch-t4")?,
            n: opts.n.unwrap_or(2000),
            quantile: q,
            lags: lags.clone(),
            functional,
            estimators: opts.estimators_or("backward")?,
            schemes: schemes.clone(),
            reps: opts.reps.unwrap_or(300),
            bootstrap_replicates: opts.replicates.unwrap_or(300),
            level: opts.level.unwrap_or(0.95),
            rescale_from: opts.rescale_from,
            burn_in: opts.burn_in.unwrap_or(DEFAULT_BURN_IN),
            seed: rng::derive_seed(seed, i as u64),
        };
        let report = study_coverage(&cfg, &oracle)?;
        match &mut combined {
            None => combined = Some(report),
            Some(all) => all.rows.extend(report.rows),
        }
    }
    let report = combined.expect("at least one target");
    let mut files = vec!["oracle.json".to_string()];
    files.extend(write_report(&report, out, "study_coverage")?);
    Ok(files)
}

#[derive(Serialize)]
struct IndependenceRow {
    target: String,
    x: f64,
    lag: i64,
    conditioning: Conditioning,
    threshold: f64,
    monte_carlo: Option<f64>,
    analytic: Option<f64>,
    estimator: EstimatorKind,
    level: f64,
    quantile: Option<f64>,
}

fn cmd_independence(opts: &Options, seed: u64, out: &Path) -> Result<Vec<String>> {
    let lags = opts.lags_or("1")?;
    let targets = opts.targets("abs-exceeds", "1")?;
    let conditioning = opts.conditioning_or(Conditioning::Absolute)?;
    let estimator = single_estimator(opts, "forward")?;
    let level = opts.level.unwrap_or(0.8);
    let reps = opts.mc_reps.unwrap_or(1000);
    let w = SeriesWindow::new(load_input(opts)?, max_abs_lag(&lags))?;
    let u = resolve_threshold(&w, opts.threshold(0.95))?;
    let mut rows = Vec::new();
    let mut idx = 0u64;
    for &lag in &lags {
        for &f in &targets {
            let s = rng::derive_seed(seed, idx);
            idx += 1;
            let r = independence_reference(&w, u, lag, f, conditioning, reps, s)?;
            let quantile = if reps > 0 {
                Some(independence_quantile(&w, u, lag, f, conditioning, estimator, level, reps, s)?)
            } else {
                None
            };
            rows.push(IndependenceRow {
                target: f.label(),
                x: f.x(),
                lag,
                conditioning,
                threshold: u,
                monte_carlo: r.monte_carlo,
                analytic: r.analytic,
                estimator,
                level,
                quantile,
            });
        }
    }
    write_csv(&out.join("independence.csv"), &rows)?;
    Ok(vec!["independence.csv".into()])
}

fn cmd_apply(opts: &Options, seed: u64, out: &Path) -> Result<Vec<String>> {
    let path = opts
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("--input is required".into()))?;
    let kind = match opts.input_kind.unwrap_or(SeriesKind::Price) {
        SeriesKind::Price => InputKind::Price,
        SeriesKind::Return => InputKind::Return,
        SeriesKind::Value => {
            return Err(Error::InvalidInput("apply reads dated prices or returns".into()))
        }
    };
    let series = ingest_prices(path, &ColumnSpec::for_kind(kind))?;
    let settings = ApplySettings::from_options(opts, seed)?;
    run_apply(&series.returns, &settings, out)
}
