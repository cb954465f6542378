//! Application-level contract tests: the normal predictive demonstration
//! holds across seeds, tabular output survives a write/read cycle without
//! losing a bit, and the binary's exit codes separate configuration
//! mistakes from numerical failures.

use std::fs;
use std::process::Command;

use uq_cli::csvio::ingest_csv_column;
use uq_cli::demo::normal_predictive_demo;
use uq_cli::dyke::{render_dyke_csv, run_dyke_replicates, DykeStudy};

#[test]
fn predictive_widening_holds_in_at_least_eighteen_of_twenty_seeds() {
    // parameter uncertainty must widen the predictive distribution beyond
    // the truth: its 5th-95th interval contains the true one, and its
    // variance dominates the posterior mean of the observation variance;
    // both are Monte-Carlo statements, so a small failure rate is allowed
    let mut contains = 0;
    let mut dominates = 0;
    for seed in 0..20 {
        let demo = normal_predictive_demo(seed).expect("demo runs");
        if demo.interval_contains {
            contains += 1;
        }
        if demo.variance_dominates {
            dominates += 1;
        }
    }
    assert!(
        contains >= 18,
        "interval containment held in only {contains}/20 seeds"
    );
    assert!(
        dominates >= 18,
        "variance dominance held in only {dominates}/20 seeds"
    );
}

#[test]
fn replicate_table_csv_round_trips_bit_exactly() {
    let mut study = DykeStudy::standard(4, 30, 5).expect("study config");
    study.posterior_draws = 4000;
    let table = run_dyke_replicates(&study).expect("replicates run");
    assert_eq!(table.rows.len(), 4, "replicate count");

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("table.csv");
    fs::write(&path, render_dyke_csv(&table)).expect("write csv");

    // columns 1..=6 hold the reals; re-parse each and compare raw bits
    let columns: [(usize, fn(&uq_cli::dyke::DykeRow) -> f64); 6] = [
        (1, |r| r.p_mle),
        (2, |r| r.p_hpe),
        (3, |r| r.p_bayes_log_quadratic),
        (4, |r| r.p_bayes_weighted_absolute),
        (5, |r| r.p_true),
        (6, |r| r.p_posterior_median),
    ];
    for (col, field) in columns {
        let sample = ingest_csv_column(&path, col).expect("re-ingest column");
        assert_eq!(sample.n(), table.rows.len(), "column {col} row count");
        for (value, row) in sample.values().iter().zip(&table.rows) {
            let original = field(row);
            assert_eq!(
                value.to_bits(),
                original.to_bits(),
                "column {col}: {original} came back as {value}"
            );
        }
    }
}

#[test]
fn exit_codes_separate_config_errors_from_numerical_failures() {
    let bin = env!("CARGO_BIN_EXE_uq");
    let dir = tempfile::tempdir().expect("temp dir");

    // success: a conjugate Bernoulli study with an exact answer
    let coin = dir.path().join("coin.json");
    fs::write(
        &coin,
        r#"{
            "model": "bernoulli",
            "prior": {"family": "bernoulli-beta", "a": 0.0, "b": 0.0},
            "data": {"inline": [1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0]},
            "quantity": {"kind": "mean"},
            "estimators": ["hpe"],
            "montecarlo": {"posterior_draws": 1000, "predictive_draws": 1000, "sampler": "auto"},
            "seed": 1
        }"#,
    )
    .expect("write config");
    let out_path = dir.path().join("coin_report.json");
    let ok = Command::new(bin)
        .args(["estimate", "--config"])
        .arg(&coin)
        .arg("--out")
        .arg(&out_path)
        .output()
        .expect("binary runs");
    assert_eq!(
        ok.status.code(),
        Some(0),
        "clean run should exit 0: {}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(out_path.exists(), "report file written");

    // config error: the file does not exist
    let missing = Command::new(bin)
        .args(["estimate", "--config", "/nonexistent/study.json", "--out"])
        .arg(dir.path().join("never.json"))
        .output()
        .expect("binary runs");
    assert_eq!(
        missing.status.code(),
        Some(2),
        "missing config should exit 2: {}",
        String::from_utf8_lossy(&missing.stderr)
    );
    assert!(
        String::from_utf8_lossy(&missing.stderr).starts_with("error:"),
        "stderr should explain the failure"
    );

    // config error: structurally valid JSON rejected by validation
    let invalid = dir.path().join("invalid.json");
    fs::write(
        &invalid,
        r#"{
            "model": "bernoulli",
            "prior": {"family": "bernoulli-beta", "a": 0.0, "b": 0.0},
            "data": {"inline": [1.0, 0.0]},
            "quantity": {"kind": "mean"},
            "estimators": [],
            "seed": 1
        }"#,
    )
    .expect("write config");
    let rejected = Command::new(bin)
        .args(["estimate", "--config"])
        .arg(&invalid)
        .arg("--out")
        .arg(dir.path().join("never2.json"))
        .output()
        .expect("binary runs");
    assert_eq!(
        rejected.status.code(),
        Some(2),
        "empty estimator list should exit 2: {}",
        String::from_utf8_lossy(&rejected.stderr)
    );

    // numerical failure: a sharp prior far from the data starves the
    // forced importance sampler below the effective-sample-size floor
    let starved = dir.path().join("starved.json");
    fs::write(
        &starved,
        r#"{
            "model": "exponential",
            "prior": {"family": "exp-inverse-gamma", "n0": 400.0, "s0": 40.0},
            "data": {"inline": [400.0, 420.0, 410.0, 380.0, 390.0, 405.0, 415.0, 395.0]},
            "quantity": {"kind": "mean"},
            "estimators": ["hpe"],
            "montecarlo": {"posterior_draws": 2000, "predictive_draws": 200, "sampler": "importance"},
            "seed": 5
        }"#,
    )
    .expect("write config");
    let numeric = Command::new(bin)
        .args(["estimate", "--config"])
        .arg(&starved)
        .arg("--out")
        .arg(dir.path().join("never3.json"))
        .output()
        .expect("binary runs");
    assert_eq!(
        numeric.status.code(),
        Some(3),
        "starved sampler should exit 3: {}",
        String::from_utf8_lossy(&numeric.stderr)
    );
    assert!(
        String::from_utf8_lossy(&numeric.stderr).contains("effective sample size"),
        "stderr should name the diagnosis: {}",
        String::from_utf8_lossy(&numeric.stderr)
    );
}
