//! Bootstrap intervals for P(|Theta_1| > 1) under both schemes, with and
//! without threshold rescaling.

use spectail::bootstrap::{bootstrap_ci, BootstrapScheme, CiRequest};
use spectail::simulators::{simulate, ModelSpec, SimulationPlan};
use spectail::{Conditioning, EstimatorKind, SeriesWindow, TailFunctional, ThresholdSpec};

fn main() -> spectail::Result<()> {
    let x = simulate(&SimulationPlan::new(ModelSpec::garch_t4(), 4000, 11))?;
    let w = SeriesWindow::new(x, 1)?;
    let schemes = [
        BootstrapScheme::multiplier(100, 500, 1),
        BootstrapScheme::stationary(100.0, 500, 2),
    ];
    for estimator in [EstimatorKind::Forward, EstimatorKind::Backward] {
        for scheme in schemes {
            for rescale_from in [None, Some(ThresholdSpec::Quantile(0.95))] {
                let req = CiRequest {
                    threshold: ThresholdSpec::Quantile(0.98),
                    lag: 1,
                    functional: TailFunctional::AbsExceeds(1.0),
                    estimator,
                    conditioning: Conditioning::Absolute,
                    scheme,
                    level: 0.9,
                    rescale_from,
                    keep_draws: false,
                };
                let ci = bootstrap_ci(&w, &req)?;
                println!(
                    "{:<9} {:<11} {:<9} {:.4}  [{:.4}, {:.4}]  discarded {}",
                    estimator.label(),
                    scheme.label(),
                    if rescale_from.is_some() { "rescaled" } else { "direct" },
                    ci.point_estimate,
                    ci.lower,
                    ci.upper,
                    ci.discarded,
                );
            }
        }
    }
    Ok(())
}
