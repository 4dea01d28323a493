//! Monte Carlo values of P(Theta_t <= x) at a finite threshold, with
//! standard errors, for the three conditionings.

use spectail::simulators::ModelSpec;
use spectail::study::{oracle_table, OracleSpec};
use spectail::{Conditioning, TailFunctional};

fn main() -> spectail::Result<()> {
    let functionals = vec![
        TailFunctional::Cdf(-1.0),
        TailFunctional::Cdf(1.0),
        TailFunctional::AbsExceeds(1.0),
    ];
    let mut spec = OracleSpec::new(ModelSpec::garch_t4(), 0.95, vec![1, 2, 5], functionals);
    spec.replicates = 200;
    spec.conditionings = vec![Conditioning::Absolute, Conditioning::Positive, Conditioning::Negative];
    let table = oracle_table(&spec)?;
    println!("pooled threshold {:.4}, skipped {}", table.threshold.unwrap(), table.skipped);
    for c in &table.cells {
        println!(
            "{:<9} lag {:>2} {:<16} {:.4} ± {:.4}",
            c.conditioning.label(),
            c.lag,
            c.functional.label(),
            c.value,
            c.std_error
        );
    }
    Ok(())
}
