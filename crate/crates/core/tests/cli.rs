use std::fs;
use std::path::Path;
use std::process::Command;

use spectail::simulators::{simulate, ModelSpec, SimulationPlan};

fn spectail(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_spectail"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, body: &str) {
    fs::write(path, body).unwrap();
}

#[test]
fn estimate_fixture_row() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("fx.csv"), "value\n0.5\n2\n10\n-4\n1\n6\n-12\n3\n7\n");
    let out = spectail(
        &["estimate", "--input", "fx.csv", "--threshold-level", "5", "--lags", "1", "--grid", "0", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("o/estimate.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let value: f64 = rows[0][4].parse().unwrap();
    assert!((value - 0.6667).abs() < 1e-4);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["version"].is_string());
}

#[test]
fn estimate_rows_are_grid_times_lags() {
    let dir = tempfile::tempdir().unwrap();
    let sim = spectail(&["simulate", "--model", "garch-t4", "--length", "1000", "--seed", "5", "--out", "s"], dir.path());
    assert!(sim.status.success());
    let out = spectail(
        &[
            "estimate", "--input", "s/series.csv", "--lags", "1..3", "--grid", "-2:2:0.5",
            "--estimator", "backward", "--out", "e",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let n = csv::Reader::from_path(dir.path().join("e/estimate.csv")).unwrap().records().count();
    assert_eq!(n, 9 * 3);
}

#[test]
fn unknown_subcommand_exits_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = spectail(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn failures_write_error_json() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("p.csv"), "date,price\n2000-01-03,100\n2000-01-04,abc\n2000-01-05,102\n");
    let out = spectail(&["estimate", "--input", "p.csv", "--input-kind", "price", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/error.json")).unwrap()).unwrap();
    assert_eq!(err["error"], "ParseError");
    assert!(err["message"].as_str().unwrap().contains("row 2"));
}

#[test]
fn manifest_config_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(spectail(&["simulate", "--length", "1500", "--seed", "9", "--out", "s"], d).status.success());
    let first = spectail(
        &[
            "ci", "--input", "s/series.csv", "--lags", "1,2", "--grid", "1", "--replicates", "60",
            "--scheme", "stationary", "--block", "50", "--seed", "42", "--out", "a",
        ],
        d,
    );
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let again = spectail(&["ci", "--config", "a/config.toml", "--out", "b"], d);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    for f in ["ci.csv", "ci.json", "config.toml"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    let ma: serde_json::Value = serde_json::from_slice(&fs::read(d.join("a/manifest.json")).unwrap()).unwrap();
    let mb: serde_json::Value = serde_json::from_slice(&fs::read(d.join("b/manifest.json")).unwrap()).unwrap();
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(mb["seed"], 42);
}

#[test]
fn independence_and_studies_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(spectail(&["simulate", "--model", "iid-t3", "--length", "5000", "--out", "s"], d).status.success());
    let ind = spectail(&["independence", "--input", "s/series.csv", "--mc-reps", "50", "--out", "i"], d);
    assert!(ind.status.success(), "{}", String::from_utf8_lossy(&ind.stderr));
    let rmse = spectail(
        &[
            "study-rmse", "--n", "500", "--reps", "5", "--oracle-replicates", "4", "--oracle-length", "2000",
            "--burn-in", "200", "--out", "r",
        ],
        d,
    );
    assert!(rmse.status.success(), "{}", String::from_utf8_lossy(&rmse.stderr));
    assert_eq!(csv::Reader::from_path(d.join("r/study_rmse.csv")).unwrap().records().count(), 8);
    let cov = spectail(
        &[
            "study-coverage", "--n", "500", "--reps", "3", "--replicates", "20", "--lags", "1..2",
            "--scheme", "multiplier,stationary", "--block", "25", "--oracle-replicates", "4",
            "--oracle-length", "2000", "--burn-in", "200", "--out", "c",
        ],
        d,
    );
    assert!(cov.status.success(), "{}", String::from_utf8_lossy(&cov.stderr));
    assert_eq!(csv::Reader::from_path(d.join("c/study_coverage.csv")).unwrap().records().count(), 4);
}

#[test]
fn apply_on_simulated_prices() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let r = simulate(&SimulationPlan::new(ModelSpec::sp500_garch(), 3000, 3)).unwrap();
    let mut body = String::from("date,price\n");
    let mut price = 100.0;
    let start = chrono::NaiveDate::from_ymd_opt(1990, 1, 1).unwrap();
    body.push_str(&format!("{start},{price}\n"));
    for (i, x) in r.iter().enumerate() {
        price *= x.exp();
        body.push_str(&format!("{},{price}\n", start + chrono::Days::new(i as u64 + 1)));
    }
    write(&d.join("prices.csv"), &body);
    let out = spectail(
        &[
            "apply", "--input", "prices.csv", "--lags", "1..3", "--replicates", "50", "--mc-reps", "20",
            "--oracle-replicates", "4", "--oracle-length", "3000", "--out", "app",
        ],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // 3 series x 6 panels x 3 lags
    let rows = csv::Reader::from_path(d.join("app/apply_table.csv")).unwrap().records().count();
    assert_eq!(rows, 54);
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("app/apply_summary.json")).unwrap()).unwrap();
    assert!(summary["series"][0]["alpha_hat"].as_f64().unwrap() > 0.0);
    assert!(summary["garch_fit"]["beta1"].as_f64().unwrap() > 0.5);
}
