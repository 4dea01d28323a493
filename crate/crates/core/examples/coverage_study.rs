//! Coverage of 90% intervals for P(|Theta_t| > 1) under both bootstrap
//! schemes. Kept small; raise `reps` for stable numbers.

use spectail::simulators::{ModelSpec, DEFAULT_BURN_IN};
use spectail::study::{oracle_table, study_coverage, CoverageStudy, OracleSpec, SchemeSpec};
use spectail::{EstimatorKind, TailFunctional};

fn main() -> spectail::Result<()> {
    let model = ModelSpec::garch_t4();
    let f = TailFunctional::AbsExceeds(1.0);
    let lags = vec![1, 2];
    let mut spec = OracleSpec::new(model, 0.95, lags.clone(), vec![f]);
    spec.replicates = 200;
    let truth = oracle_table(&spec)?;

    let cfg = CoverageStudy {
        model,
        n: 2000,
        quantile: 0.95,
        lags,
        functional: f,
        estimators: vec![EstimatorKind::Forward, EstimatorKind::Backward],
        schemes: vec![SchemeSpec::multiplier(100), SchemeSpec::stationary(100)],
        reps: 50,
        bootstrap_replicates: 200,
        level: 0.9,
        rescale_from: None,
        burn_in: DEFAULT_BURN_IN,
        seed: 5,
    };
    let report = study_coverage(&cfg, &truth)?;
    for r in &report.rows {
        println!(
            "{:<11} {:<9} lag {} coverage {:.2} median width {:.4}",
            r.scheme.as_deref().unwrap_or("-"),
            r.estimator.label(),
            r.lag,
            r.coverage.unwrap_or(f64::NAN),
            r.median_width.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
