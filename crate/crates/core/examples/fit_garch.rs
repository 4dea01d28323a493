//! Gaussian QMLE of a GARCH(1,1) on a simulated path, then standardized
//! residuals.

use spectail::app::fit_garch11;
use spectail::simulators::{residuals, simulate, ModelSpec, SimulationPlan};
use spectail::{hill_alpha, resolve_threshold, SeriesWindow, ThresholdSpec};

fn main() -> spectail::Result<()> {
    let truth = ModelSpec::sp500_garch();
    let x = simulate(&SimulationPlan::new(truth, 5000, 2024))?;
    let fit = fit_garch11(&x)?;
    println!("true   {truth:?}");
    println!(
        "fitted omega {:.3e} alpha {:.4} beta {:.4}  loglik {:.1}  converged {}",
        fit.omega, fit.alpha1, fit.beta1, fit.log_likelihood, fit.converged
    );
    if let Some(se) = fit.std_errors {
        println!("se     omega {:.2e} alpha {:.4} beta {:.4}", se[0], se[1], se[2]);
    }

    for (name, series) in [("returns", x.clone()), ("residuals", residuals(&x, &fit.model_spec())?)] {
        let w = SeriesWindow::new(series, 0)?;
        let u = resolve_threshold(&w, ThresholdSpec::Quantile(0.98))?;
        println!("{name:<10} Hill alpha {:.3}", hill_alpha(&w, u)?.alpha);
    }
    Ok(())
}
