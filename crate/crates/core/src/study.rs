//! Monte Carlo harnesses.
//!
//! The pre-asymptotic truth of a functional such as `P(X_t/|X_0| <= x | |X_0| > u)`
//! is approximated by averaging forward estimates over many long simulated
//! series. Estimator and coverage studies then compare estimates and
//! bootstrap intervals from short series against that truth.
//!
//! All loops draw replicate `r` from `rng::stream(seed, r)`, so reports are
//! bitwise reproducible from `(seed, config)` whatever the thread count.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_ci, BootstrapScheme, CiRequest, MultiplierLaw, SchemeKind};
use crate::error::{Error, Result};
use crate::estimators::Exceedances;
use crate::rng::{self, StreamRng};
use crate::simulators::{simulate_with, ModelSpec, DEFAULT_BURN_IN};
use crate::window::{
    empirical_quantile, quantile_of, Conditioning, EstimatorKind, SeriesWindow, TailFunctional,
    ThresholdSpec,
};

/// Produces raw series for Monte Carlo loops.
pub trait SeriesSource: Sync {
    fn generate(&self, length: usize, rng: &mut StreamRng) -> Result<Vec<f64>>;
}

/// A [`ModelSpec`] with a burn-in period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSource {
    pub model: ModelSpec,
    pub burn_in: usize,
}

impl ModelSource {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            burn_in: DEFAULT_BURN_IN,
        }
    }
}

impl SeriesSource for ModelSource {
    fn generate(&self, length: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
        simulate_with(&self.model, length, self.burn_in, rng)
    }
}

impl<F> SeriesSource for F
where
    F: Fn(usize, &mut StreamRng) -> Result<Vec<f64>> + Sync,
{
    fn generate(&self, length: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
        self(length, rng)
    }
}

/// How the oracle picks its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleThreshold {
    /// One quantile of `|X|` pooled over all oracle series, standing in
    /// for the true marginal quantile.
    Pooled,
    /// Each series is thresholded at its own empirical quantile.
    PerReplicate,
}

/// Configuration of the pre-asymptotic truth oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub model: ModelSpec,
    pub replicates: usize,
    pub length: usize,
    pub quantile: f64,
    pub lags: Vec<i64>,
    pub functionals: Vec<TailFunctional>,
    pub conditionings: Vec<Conditioning>,
    pub threshold_mode: OracleThreshold,
    pub burn_in: usize,
    pub seed: u64,
    /// Retain per-replicate values (needed for paired comparisons).
    #[serde(default)]
    pub keep_draws: bool,
}

impl OracleSpec {
    /// Desk-scale defaults: 2000 series of length 10000, pooled threshold.
    pub fn new(model: ModelSpec, quantile: f64, lags: Vec<i64>, functionals: Vec<TailFunctional>) -> Self {
        Self {
            model,
            replicates: 2000,
            length: 10_000,
            quantile,
            lags,
            functionals,
            conditionings: vec![Conditioning::Absolute],
            threshold_mode: OracleThreshold::Pooled,
            burn_in: DEFAULT_BURN_IN,
            seed: 0x5EED,
            keep_draws: false,
        }
    }

    fn max_lag(&self) -> usize {
        self.lags.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    fn cells(&self) -> Vec<(Conditioning, i64, TailFunctional)> {
        let mut cells = Vec::new();
        for &c in &self.conditionings {
            for &lag in &self.lags {
                for &f in &self.functionals {
                    cells.push((c, lag, f));
                }
            }
        }
        cells
    }
}

/// One oracle value with its Monte Carlo standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCell {
    pub conditioning: Conditioning,
    pub lag: i64,
    pub functional: TailFunctional,
    pub value: f64,
    pub std_error: f64,
    pub replicates_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleTable {
    pub spec: OracleSpec,
    /// The pooled threshold, when one is used.
    pub threshold: Option<f64>,
    pub cells: Vec<OracleCell>,
    /// Replicates skipped for lack of exceedances.
    pub skipped: usize,
}

impl OracleTable {
    pub fn get(&self, conditioning: Conditioning, lag: i64, functional: TailFunctional) -> Option<&OracleCell> {
        self.cells
            .iter()
            .find(|c| c.conditioning == conditioning && c.lag == lag && c.functional == functional)
    }

    /// Value for an absolute-conditioning cell; errors when missing.
    pub fn truth(&self, lag: i64, functional: TailFunctional) -> Result<f64> {
        self.get(Conditioning::Absolute, lag, functional)
            .map(|c| c.value)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "oracle has no cell for lag {lag}, {}",
                    functional.label()
                ))
            })
    }

    /// Mean and standard error of the per-replicate difference `a - b`.
    /// Requires `keep_draws`.
    pub fn paired_difference(&self, a: &OracleCell, b: &OracleCell) -> Result<(f64, f64)> {
        let (da, db) = match (&a.draws, &b.draws) {
            (Some(da), Some(db)) if da.len() == db.len() && da.len() >= 2 => (da, db),
            _ => {
                return Err(Error::InvalidInput(
                    "paired difference needs retained draws of equal length".into(),
                ))
            }
        };
        let diffs: Vec<f64> = da.iter().zip(db).map(|(x, y)| x - y).collect();
        let (mean, sd) = mean_and_sample_sd(&diffs);
        Ok((mean, sd / (diffs.len() as f64).sqrt()))
    }
}

fn mean_and_sample_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Pre-asymptotic truth table from the model in `spec`.
pub fn oracle_table(spec: &OracleSpec) -> Result<OracleTable> {
    let source = ModelSource {
        model: spec.model,
        burn_in: spec.burn_in,
    };
    oracle_table_with(spec, &source)
}

/// Single pre-asymptotic truth value for one functional and lag.
pub fn preasymptotic_truth(
    spec: &OracleSpec,
    functional: TailFunctional,
    lag: i64,
) -> Result<OracleCell> {
    let single = OracleSpec {
        lags: vec![lag],
        functionals: vec![functional],
        conditionings: vec![spec.conditionings.first().copied().unwrap_or(Conditioning::Absolute)],
        ..spec.clone()
    };
    let table = oracle_table(&single)?;
    Ok(table.cells.into_iter().next().expect("one cell"))
}

fn pooled_quantile<S: SeriesSource + ?Sized>(spec: &OracleSpec, source: &S, total_len: usize) -> Result<f64> {
    let core_len = spec.length;
    let lag = spec.max_lag();
    // |X| pooled over all series; f32 halves memory and is far below MC error
    let mut pooled = vec![0f32; spec.replicates * core_len];
    pooled
        .par_chunks_mut(core_len)
        .enumerate()
        .try_for_each(|(r, chunk)| -> Result<()> {
            let x = source.generate(total_len, &mut rng::stream(spec.seed, r as u64))?;
            for (dst, v) in chunk.iter_mut().zip(&x[lag..lag + core_len]) {
                *dst = v.abs() as f32;
            }
            Ok(())
        })?;
    let pos = spec.quantile * (pooled.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    let (_, &mut lo_val, upper) = pooled.select_nth_unstable_by(lo, f32::total_cmp);
    let hi_val = upper.iter().copied().fold(f32::INFINITY, f32::min);
    let (lo_val, hi_val) = (lo_val as f64, hi_val as f64);
    Ok(if frac == 0.0 || !hi_val.is_finite() {
        lo_val
    } else {
        lo_val + frac * (hi_val - lo_val)
    })
}

/// As [`oracle_table`] with a custom series generator.
pub fn oracle_table_with<S: SeriesSource + ?Sized>(spec: &OracleSpec, source: &S) -> Result<OracleTable> {
    if spec.replicates == 0 || spec.length == 0 {
        return Err(Error::InvalidInput("oracle needs R >= 1 and L >= 1".into()));
    }
    if !(spec.quantile > 0.0 && spec.quantile < 1.0) {
        return Err(Error::InvalidInput(format!("quantile must lie in (0,1), got {}", spec.quantile)));
    }
    let max_lag = spec.max_lag();
    let total_len = spec.length + 2 * max_lag;
    let pooled = match spec.threshold_mode {
        OracleThreshold::Pooled => Some(pooled_quantile(spec, source, total_len)?),
        OracleThreshold::PerReplicate => None,
    };
    let cells = spec.cells();
    let per_rep: Vec<Option<Vec<f64>>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| -> Result<Option<Vec<f64>>> {
            let x = source.generate(total_len, &mut rng::stream(spec.seed, r as u64))?;
            let w = SeriesWindow::new(x, max_lag)?;
            let u = match pooled {
                Some(u) => u,
                None => {
                    let abs: Vec<f64> = w.core().iter().map(|v| v.abs()).collect();
                    quantile_of(&abs, spec.quantile)
                }
            };
            if !(u > 0.0) {
                return Ok(None);
            }
            let exc = Exceedances::new(&w, u)?;
            let mut out = Vec::with_capacity(cells.len());
            for &(cond, lag, f) in &cells {
                match exc.functional(EstimatorKind::Forward, lag, f, cond, None) {
                    Ok(v) => out.push(v),
                    Err(Error::NoExceedances { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Some(out))
        })
        .collect::<Result<_>>()?;
    let used: Vec<&Vec<f64>> = per_rep.iter().flatten().collect();
    let skipped = spec.replicates - used.len();
    if used.is_empty() {
        return Err(Error::NoExceedances {
            threshold: pooled.unwrap_or(f64::NAN),
        });
    }
    let out_cells = cells
        .iter()
        .enumerate()
        .map(|(j, &(conditioning, lag, functional))| {
            let draws: Vec<f64> = used.iter().map(|v| v[j]).collect();
            let (value, sd) = mean_and_sample_sd(&draws);
            OracleCell {
                conditioning,
                lag,
                functional,
                value,
                std_error: sd / (draws.len() as f64).sqrt(),
                replicates_used: draws.len(),
                draws: spec.keep_draws.then_some(draws),
            }
        })
        .collect();
    Ok(OracleTable {
        spec: spec.clone(),
        threshold: pooled,
        cells: out_cells,
        skipped,
    })
}

/// One row of a study report. Unused statistics are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub target: String,
    pub x: f64,
    pub lag: i64,
    pub estimator: EstimatorKind,
    pub scheme: Option<String>,
    pub block: Option<f64>,
    pub interval: Option<String>,
    pub threshold_quantile: f64,
    pub truth: f64,
    pub mean: Option<f64>,
    pub bias: Option<f64>,
    pub sd: Option<f64>,
    pub rmse: Option<f64>,
    /// Backward RMSE over forward RMSE (on backward rows).
    pub rmse_ratio: Option<f64>,
    pub coverage: Option<f64>,
    pub median_width: Option<f64>,
    pub replicates_used: usize,
    pub discarded: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMetadata {
    pub study: String,
    pub model: ModelSpec,
    pub n: usize,
    pub quantile: f64,
    pub reps: usize,
    pub bootstrap_replicates: Option<usize>,
    pub level: Option<f64>,
    pub rescale_from: Option<f64>,
    pub oracle_replicates: usize,
    pub oracle_length: usize,
    pub oracle_threshold: Option<f64>,
    pub seed: u64,
    pub skipped_reps: usize,
}

/// Bias/sd/RMSE or coverage table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub metadata: StudyMetadata,
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn find<P: Fn(&StudyRow) -> bool>(&self, pred: P) -> Option<&StudyRow> {
        self.rows.iter().find(|r| pred(r))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        for row in &self.rows {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }
}

/// Bias/sd/RMSE of the forward and backward estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStudy {
    pub model: ModelSpec,
    pub n: usize,
    pub quantile: f64,
    pub lags: Vec<i64>,
    pub functionals: Vec<TailFunctional>,
    pub reps: usize,
    pub burn_in: usize,
    pub seed: u64,
}

struct Moments {
    mean: f64,
    sd: f64,
    rmse: f64,
}

fn moments(values: &[f64], truth: f64) -> Moments {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mse = values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / n;
    Moments {
        mean,
        sd: var.sqrt(),
        rmse: mse.sqrt(),
    }
}

fn max_lag(lags: &[i64]) -> usize {
    lags.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
}

/// Simulates `reps` series of length `n`, estimates every cell with both
/// estimators (Hill tail index for the backward one) and compares against
/// `truth`.
pub fn study_estimators(cfg: &EstimatorStudy, truth: &OracleTable) -> Result<StudyReport> {
    if cfg.reps == 0 {
        return Err(Error::InvalidInput("need at least one repetition".into()));
    }
    let cells: Vec<(i64, TailFunctional, f64)> = cfg
        .lags
        .iter()
        .flat_map(|&lag| cfg.functionals.iter().map(move |&f| (lag, f)))
        .map(|(lag, f)| truth.truth(lag, f).map(|t| (lag, f, t)))
        .collect::<Result<_>>()?;
    let lag_buf = max_lag(&cfg.lags);
    let source = ModelSource {
        model: cfg.model,
        burn_in: cfg.burn_in,
    };
    let per_rep: Vec<Option<Vec<(f64, f64)>>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| -> Result<Option<Vec<(f64, f64)>>> {
            let x = source.generate(cfg.n + 2 * lag_buf, &mut rng::stream(cfg.seed, r as u64))?;
            let w = SeriesWindow::new(x, lag_buf)?;
            let u = match crate::window::resolve_threshold(&w, ThresholdSpec::Quantile(cfg.quantile)) {
                Ok(u) => u,
                Err(Error::NoExceedances { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let exc = Exceedances::new(&w, u)?;
            let alpha = exc.hill()?.alpha;
            let mut out = Vec::with_capacity(cells.len());
            for &(lag, f, _) in &cells {
                let fw = exc.functional(EstimatorKind::Forward, lag, f, Conditioning::Absolute, None)?;
                let bw = exc.functional(EstimatorKind::Backward, lag, f, Conditioning::Absolute, Some(alpha))?;
                out.push((fw, bw));
            }
            Ok(Some(out))
        })
        .collect::<Result<_>>()?;
    let used: Vec<&Vec<(f64, f64)>> = per_rep.iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::NoExceedances { threshold: f64::NAN });
    }
    let mut rows = Vec::with_capacity(2 * cells.len());
    for (j, &(lag, f, t)) in cells.iter().enumerate() {
        let fw: Vec<f64> = used.iter().map(|v| v[j].0).collect();
        let bw: Vec<f64> = used.iter().map(|v| v[j].1).collect();
        let (mf, mb) = (moments(&fw, t), moments(&bw, t));
        for (kind, m, ratio) in [
            (EstimatorKind::Forward, &mf, None),
            (EstimatorKind::Backward, &mb, Some(mb.rmse / mf.rmse)),
        ] {
            rows.push(StudyRow {
                target: f.label(),
                x: f.x(),
                lag,
                estimator: kind,
                scheme: None,
                block: None,
                interval: None,
                threshold_quantile: cfg.quantile,
                truth: t,
                mean: Some(m.mean),
                bias: Some(m.mean - t),
                sd: Some(m.sd),
                rmse: Some(m.rmse),
                rmse_ratio: ratio,
                coverage: None,
                median_width: None,
                replicates_used: used.len(),
                discarded: 0,
                failed: 0,
            });
        }
    }
    Ok(StudyReport {
        metadata: StudyMetadata {
            study: "estimators".into(),
            model: cfg.model,
            n: cfg.n,
            quantile: cfg.quantile,
            reps: cfg.reps,
            bootstrap_replicates: None,
            level: None,
            rescale_from: None,
            oracle_replicates: truth.spec.replicates,
            oracle_length: truth.spec.length,
            oracle_threshold: truth.threshold,
            seed: cfg.seed,
            skipped_reps: cfg.reps - used.len(),
        },
        rows,
    })
}

/// A bootstrap scheme family and block length for coverage studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub kind: SchemeFamily,
    /// Block length (mean block length for the stationary bootstrap).
    pub block: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeFamily {
    Stationary,
    Multiplier,
}

impl SchemeSpec {
    pub fn stationary(block: usize) -> Self {
        Self {
            kind: SchemeFamily::Stationary,
            block,
        }
    }

    pub fn multiplier(block: usize) -> Self {
        Self {
            kind: SchemeFamily::Multiplier,
            block,
        }
    }

    pub fn scheme(&self, replicates: usize, seed: u64) -> BootstrapScheme {
        match self.kind {
            SchemeFamily::Stationary => BootstrapScheme::stationary(self.block as f64, replicates, seed),
            SchemeFamily::Multiplier => BootstrapScheme {
                kind: SchemeKind::Multiplier {
                    block: self.block,
                    law: MultiplierLaw::StandardNormal,
                },
                replicates,
                seed,
            },
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            SchemeFamily::Stationary => "stationary",
            SchemeFamily::Multiplier => "multiplier",
        }
    }
}

/// Coverage of bootstrap intervals for one functional over several lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStudy {
    pub model: ModelSpec,
    pub n: usize,
    pub quantile: f64,
    pub lags: Vec<i64>,
    pub functional: TailFunctional,
    pub estimators: Vec<EstimatorKind>,
    pub schemes: Vec<SchemeSpec>,
    pub reps: usize,
    pub bootstrap_replicates: usize,
    pub level: f64,
    /// Lower quantile for the additional rescaled intervals.
    pub rescale_from: Option<f64>,
    pub burn_in: usize,
    pub seed: u64,
}

#[derive(Clone, Copy)]
struct CoverageCell {
    scheme: usize,
    estimator: EstimatorKind,
    lag: i64,
    rescaled: bool,
}

/// Fraction of repetitions whose interval covers the truth, per scheme,
/// estimator, lag, and interval construction.
pub fn study_coverage(cfg: &CoverageStudy, truth: &OracleTable) -> Result<StudyReport> {
    if cfg.reps == 0 || cfg.bootstrap_replicates < 2 {
        return Err(Error::InvalidInput("need reps >= 1 and at least 2 bootstrap replicates".into()));
    }
    let mut cells = Vec::new();
    for s in 0..cfg.schemes.len() {
        for &estimator in &cfg.estimators {
            for &lag in &cfg.lags {
                cells.push(CoverageCell { scheme: s, estimator, lag, rescaled: false });
                if cfg.rescale_from.is_some() {
                    cells.push(CoverageCell { scheme: s, estimator, lag, rescaled: true });
                }
            }
        }
    }
    let truths: Vec<f64> = cells
        .iter()
        .map(|c| truth.truth(c.lag, cfg.functional))
        .collect::<Result<_>>()?;
    let lag_buf = max_lag(&cfg.lags);
    let source = ModelSource {
        model: cfg.model,
        burn_in: cfg.burn_in,
    };
    // per rep and cell: Some((covered, width, discarded)) or None if the CI failed
    type Outcome = Option<(bool, f64, usize)>;
    let per_rep: Vec<Vec<Outcome>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| -> Result<Vec<Outcome>> {
            let rep_seed = rng::derive_seed(cfg.seed, r as u64);
            let x = source.generate(cfg.n + 2 * lag_buf, &mut rng::root(rep_seed))?;
            let w = SeriesWindow::new(x, lag_buf)?;
            cells
                .iter()
                .zip(&truths)
                .enumerate()
                .map(|(j, (cell, &t))| {
                    let scheme = cfg.schemes[cell.scheme]
                        .scheme(cfg.bootstrap_replicates, rng::derive_seed(rep_seed, j as u64));
                    let req = CiRequest {
                        threshold: ThresholdSpec::Quantile(cfg.quantile),
                        lag: cell.lag,
                        functional: cfg.functional,
                        estimator: cell.estimator,
                        conditioning: Conditioning::Absolute,
                        scheme,
                        level: cfg.level,
                        rescale_from: if cell.rescaled {
                            cfg.rescale_from.map(ThresholdSpec::Quantile)
                        } else {
                            None
                        },
                        keep_draws: false,
                    };
                    match bootstrap_ci(&w, &req) {
                        Ok(ci) => Ok(Some((ci.contains(t), ci.width(), ci.discarded))),
                        Err(e) if is_ci_failure(&e) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let rows = cells
        .iter()
        .zip(&truths)
        .enumerate()
        .map(|(j, (cell, &t))| {
            let outcomes: Vec<(bool, f64, usize)> = per_rep.iter().filter_map(|o| o[j]).collect();
            let failed = cfg.reps - outcomes.len();
            let covered = outcomes.iter().filter(|o| o.0).count();
            let mut widths: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
            widths.sort_by(f64::total_cmp);
            let spec = cfg.schemes[cell.scheme];
            StudyRow {
                target: cfg.functional.label(),
                x: cfg.functional.x(),
                lag: cell.lag,
                estimator: cell.estimator,
                scheme: Some(spec.label().into()),
                block: Some(spec.block as f64),
                interval: Some(if cell.rescaled { "rescaled" } else { "direct" }.into()),
                threshold_quantile: cfg.quantile,
                truth: t,
                mean: None,
                bias: None,
                sd: None,
                rmse: None,
                rmse_ratio: None,
                coverage: (!outcomes.is_empty()).then(|| covered as f64 / outcomes.len() as f64),
                median_width: (!widths.is_empty()).then(|| empirical_quantile(&widths, 0.5)),
                replicates_used: outcomes.len(),
                discarded: outcomes.iter().map(|o| o.2).sum(),
                failed,
            }
        })
        .collect();
    Ok(StudyReport {
        metadata: StudyMetadata {
            study: "coverage".into(),
            model: cfg.model,
            n: cfg.n,
            quantile: cfg.quantile,
            reps: cfg.reps,
            bootstrap_replicates: Some(cfg.bootstrap_replicates),
            level: Some(cfg.level),
            rescale_from: cfg.rescale_from,
            oracle_replicates: truth.spec.replicates,
            oracle_length: truth.spec.length,
            oracle_threshold: truth.threshold,
            seed: cfg.seed,
            skipped_reps: 0,
        },
        rows,
    })
}

fn is_ci_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NoExceedances { .. }
            | Error::DegenerateLogs
            | Error::ZeroDenominator
            | Error::TooManyDiscarded { .. }
            | Error::TooFewReplicates(_)
    )
}

/// An iid-with-replacement resample with the same framing as `w`.
pub fn iid_resample(w: &SeriesWindow, rng: &mut StreamRng) -> Result<SeriesWindow> {
    let core = w.core();
    let total = w.len() + 2 * w.max_lag();
    let values = (0..total).map(|_| core[rng.random_range(0..core.len())]).collect();
    SeriesWindow::new(values, w.max_lag())
}

/// Reference probability under serial independence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReference {
    /// Mean forward estimate over iid resamples, if any were drawn.
    pub monte_carlo: Option<f64>,
    /// `P(|X_0| > u) / 2` from the empirical exceedance rate; only for
    /// `P(|Theta_t| > 1)` under absolute conditioning.
    pub analytic: Option<f64>,
    pub replicates_used: usize,
}

fn iid_estimates(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    functional: TailFunctional,
    conditioning: Conditioning,
    estimator: EstimatorKind,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    w.check_lag(lag)?;
    let draws: Vec<Option<f64>> = (0..reps)
        .into_par_iter()
        .map(|b| -> Result<Option<f64>> {
            let ws = iid_resample(w, &mut rng::stream(seed, b as u64))?;
            match crate::bootstrap::point_estimate(&ws, u, lag, functional, estimator, conditioning) {
                Ok(v) => Ok(Some(v)),
                Err(Error::NoExceedances { .. }) | Err(Error::DegenerateLogs) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    Ok(draws.into_iter().flatten().collect())
}

/// Probability of `functional` under serial independence: the mean forward
/// estimate over `reps` iid resamples of `w` and, where available, the
/// analytic value.
pub fn independence_reference(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    functional: TailFunctional,
    conditioning: Conditioning,
    reps: usize,
    seed: u64,
) -> Result<IndependenceReference> {
    let analytic = (conditioning == Conditioning::Absolute
        && functional == TailFunctional::AbsExceeds(1.0))
    .then(|| {
        let k = w.core().iter().filter(|v| v.abs() > u).count();
        k as f64 / w.len() as f64 / 2.0
    });
    if reps == 0 {
        return match analytic {
            Some(_) => Ok(IndependenceReference {
                monte_carlo: None,
                analytic,
                replicates_used: 0,
            }),
            None => Err(Error::InvalidInput(
                "no analytic reference for this target; need at least one replicate".into(),
            )),
        };
    }
    let values = iid_estimates(w, u, lag, functional, conditioning, EstimatorKind::Forward, reps, seed)?;
    if values.is_empty() {
        return Err(Error::NoExceedances { threshold: u });
    }
    Ok(IndependenceReference {
        monte_carlo: Some(values.iter().sum::<f64>() / values.len() as f64),
        analytic,
        replicates_used: values.len(),
    })
}

/// Empirical `level` quantile of an estimator under iid resampling of `w`.
#[allow(clippy::too_many_arguments)]
pub fn independence_quantile(
    w: &SeriesWindow,
    u: f64,
    lag: i64,
    functional: TailFunctional,
    conditioning: Conditioning,
    estimator: EstimatorKind,
    level: f64,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::InvalidInput(format!("level must lie in (0, 1], got {level}")));
    }
    if reps == 0 {
        return Err(Error::InvalidInput("need at least one replicate".into()));
    }
    let mut values = iid_estimates(w, u, lag, functional, conditioning, estimator, reps, seed)?;
    if values.is_empty() {
        return Err(Error::NoExceedances { threshold: u });
    }
    values.sort_by(f64::total_cmp);
    Ok(empirical_quantile(&values, level))
}
