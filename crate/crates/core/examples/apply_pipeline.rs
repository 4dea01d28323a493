//! The full analysis on a price file: returns, GARCH residuals and APARCH
//! residuals, each with intervals, model curves and independence levels.
//!
//! Usage: `cargo run --release --example apply_pipeline [prices.csv]`.
//! Without an argument a synthetic price path is written to a temp dir.

use std::path::PathBuf;

use spectail::app::apply::{run_apply, ApplySettings};
use spectail::app::config::Options;
use spectail::app::{ingest_prices, ColumnSpec};
use spectail::simulators::{simulate, ModelSpec, SimulationPlan};

fn synthetic_prices(dir: &std::path::Path) -> spectail::Result<PathBuf> {
    let r = simulate(&SimulationPlan::new(ModelSpec::sp500_aparch(), 6000, 77))?;
    let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
    let mut body = format!("date,price\n{start},100\n");
    let mut p = 100.0;
    for (i, x) in r.iter().enumerate() {
        p *= x.exp();
        body.push_str(&format!("{},{p}\n", start + chrono::Days::new(i as u64 + 1)));
    }
    let path = dir.join("prices.csv");
    std::fs::write(&path, body)?;
    Ok(path)
}

fn main() -> spectail::Result<()> {
    let out = std::env::temp_dir().join("spectail-apply");
    std::fs::create_dir_all(&out)?;
    let input = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => synthetic_prices(&out)?,
    };
    let series = ingest_prices(&input, &ColumnSpec::prices())?;
    println!("{} returns from {} to {}", series.returns.len(), series.dates[0], series.dates.last().unwrap());

    let opts = Options {
        lags: Some("1..5".into()),
        replicates: Some(200),
        mc_reps: Some(200),
        oracle_replicates: Some(100),
        ..Default::default()
    };
    let settings = ApplySettings::from_options(&opts, 1)?;
    let files = run_apply(&series.returns, &settings, &out)?;
    for f in files {
        println!("wrote {}", out.join(f).display());
    }
    Ok(())
}
