//! What the estimates would look like without serial dependence: iid
//! resamples of the same series give the reference level.

use spectail::simulators::{simulate, ModelSpec, SimulationPlan};
use spectail::study::{independence_quantile, independence_reference};
use spectail::{
    resolve_threshold, Conditioning, EstimatorKind, Exceedances, SeriesWindow, TailFunctional,
    ThresholdSpec,
};

fn main() -> spectail::Result<()> {
    let x = simulate(&SimulationPlan::new(ModelSpec::sp500_garch(), 5000, 21))?;
    let w = SeriesWindow::new(x, 5)?;
    let u = resolve_threshold(&w, ThresholdSpec::Quantile(0.98))?;
    let f = TailFunctional::AbsExceeds(1.0);
    let exc = Exceedances::new(&w, u)?;
    for lag in 1..=5 {
        let est = exc.functional(EstimatorKind::Forward, lag, f, Conditioning::Absolute, None)?;
        let r = independence_reference(&w, u, lag, f, Conditioning::Absolute, 300, lag as u64)?;
        let q = independence_quantile(
            &w, u, lag, f, Conditioning::Absolute, EstimatorKind::Forward, 0.8, 300, lag as u64,
        )?;
        println!(
            "lag {lag}: estimate {est:.4}  iid mean {:.4} (analytic {:.4})  iid 80% {q:.4}",
            r.monte_carlo.unwrap(),
            r.analytic.unwrap(),
        );
    }
    Ok(())
}
