//! Bias, sd and RMSE of both estimators against a Monte Carlo truth.

use spectail::simulators::{ModelSpec, DEFAULT_BURN_IN};
use spectail::study::{oracle_table, study_estimators, EstimatorStudy, OracleSpec};
use spectail::TailFunctional;

fn main() -> spectail::Result<()> {
    let model = ModelSpec::garch_t4();
    let lags = vec![1, 2, 3];
    let functionals = vec![TailFunctional::Cdf(-1.0), TailFunctional::Cdf(1.0)];
    let mut spec = OracleSpec::new(model, 0.95, lags.clone(), functionals.clone());
    spec.replicates = 200;
    let truth = oracle_table(&spec)?;

    let cfg = EstimatorStudy {
        model,
        n: 2000,
        quantile: 0.95,
        lags,
        functionals,
        reps: 200,
        burn_in: DEFAULT_BURN_IN,
        seed: 3,
    };
    let report = study_estimators(&cfg, &truth)?;
    println!("{:<10} {:>3} {:<9} {:>7} {:>8} {:>7} {:>7} {:>6}", "target", "lag", "estimator", "truth", "bias", "sd", "rmse", "ratio");
    for r in &report.rows {
        println!(
            "{:<10} {:>3} {:<9} {:>7.4} {:>8.4} {:>7.4} {:>7.4} {:>6}",
            r.target,
            r.lag,
            r.estimator.label(),
            r.truth,
            r.bias.unwrap_or(f64::NAN),
            r.sd.unwrap_or(f64::NAN),
            r.rmse.unwrap_or(f64::NAN),
            r.rmse_ratio.map(|v| format!("{v:.3}")).unwrap_or_default(),
        );
    }
    Ok(())
}
