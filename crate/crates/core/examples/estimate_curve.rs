//! Forward and backward estimates of P(Theta_t <= x) on a simulated GARCH path.

use spectail::simulators::{simulate, ModelSpec, SimulationPlan};
use spectail::{
    resolve_threshold, sweep, AlphaPolicy, Conditioning, EstimatorKind, SeriesWindow, ThresholdSpec,
};

fn main() -> spectail::Result<()> {
    let lags = [1, 2, 3];
    let grid = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
    let x = simulate(&SimulationPlan::new(ModelSpec::garch_t4(), 20_000, 7))?;
    let w = SeriesWindow::new(x, 3)?;
    let u = resolve_threshold(&w, ThresholdSpec::Quantile(0.95))?;

    let fwd = sweep(&w, u, EstimatorKind::Forward, Conditioning::Absolute, &lags, &grid, AlphaPolicy::Hill)?;
    let bwd = sweep(&w, u, EstimatorKind::Backward, Conditioning::Absolute, &lags, &grid, AlphaPolicy::Hill)?;
    println!("u = {u:.4}, Hill alpha = {:.3}", bwd.alpha.unwrap());
    println!("{:>4} {:>6} {:>9} {:>9}", "lag", "x", "forward", "backward");
    for &lag in &lags {
        for &x in &grid {
            let f = fwd.cell(lag, x).unwrap().value;
            let b = bwd.cell(lag, x).unwrap().value;
            println!("{lag:>4} {x:>6.2} {f:>9.4} {b:>9.4}");
        }
    }
    Ok(())
}
