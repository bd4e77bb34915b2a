// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use std::process::{Command, Output};

use serde_json::Value;

fn covert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covert"))
        .args(args)
        .env_remove("BOSONIC_COVERT_SELFCHECK_FAULT")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const BUDGET: [&str; 9] = [
    "budget", "--eta", "0.5", "--nbar-b", "1", "--delta-qre", "0.01", "--n", "1000000",
];

#[test]
fn budget_json_and_csv_agree() {
    let mut args = BUDGET.to_vec();
    args.extend(["--format", "json"]);
    let doc = json(&covert(&args));
    assert_eq!(doc["schema_version"], 1);
    let nbar_s = doc["nbar_s"].as_f64().unwrap();
    assert!((nbar_s - 2.44949e-4).abs() < 1e-9);
    let rows = csv_rows(&covert(&[&BUDGET[..], &["--format", "csv"]].concat()));
    let col = rows[0].iter().position(|c| c == "nbar_s").unwrap();
    let csv_value: f64 = rows[1][col].parse().unwrap();
    assert!((csv_value / nbar_s - 1.0).abs() < 1e-5);
}

#[test]
fn budget_reports_tau_and_rejects_unbound() {
    let doc = json(&covert(&[&BUDGET[..], &["--nbar-s", "0.01"]].concat()));
    assert!((doc["tau"].as_f64().unwrap() - 0.0244949).abs() < 1e-7);
    let out = covert(&[&BUDGET[..], &["--nbar-s", "1e-5"]].concat());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn usage_errors_exit_two() {
    let out = covert(&["budget", "--eta", "0.5", "--nbar-b", "1", "--delta-qre", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n"));
    let out = covert(&["budget", "--eta", "1.2", "--nbar-b", "1", "--delta-qre", "0.01", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
    let out = covert(&["qre-sweep", "--constellation", "qpsk", "--eta", "0.5", "--nbar-b", "2",
        "--u-min", "0.001", "--u-max", "0.1", "--points", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

fn sweep(kind: &str) -> Vec<Vec<String>> {
    csv_rows(&covert(&[
        "qre-sweep", "--constellation", kind, "--eta", "0.5", "--nbar-b", "2", "--u-min", "0.002",
        "--u-max", "0.2", "--points", "6",
    ]))
}

#[test]
fn sweep_ratio_converges_and_orders() {
    let q = sweep("qpsk");
    let b = sweep("bpsk");
    assert_eq!(q[0], ["u", "qre_exact_nats", "qre_leading_nats", "ratio", "dim_used"]);
    let last: f64 = q.last().unwrap()[3].parse().unwrap();
    assert!((last - 1.0).abs() < 0.02);
    for (rq, rb) in q.iter().zip(&b).skip(1) {
        let dq: f64 = rq[1].parse().unwrap();
        let db: f64 = rb[1].parse().unwrap();
        assert!(dq <= db);
    }
}

#[test]
fn fit_coeff_qpsk() {
    let doc = json(&covert(&["fit-coeff", "--constellation", "qpsk", "--nt", "1"]));
    assert!((doc["c4_nats"].as_f64().unwrap() / 0.25 - 1.0).abs() < 1e-2);
}

#[test]
fn simulate_is_reproducible_and_seeded() {
    let args = ["simulate", "--seed", "7", "--n", "20000", "--trials", "200"];
    let a = covert(&args);
    let b = covert(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = covert(&["simulate", "--seed", "8", "--n", "20000", "--trials", "200"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_from_config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"channel": {"eta": 0.5, "nbar_b": 1.0}, "n_modes": 20000, "delta_qre": 0.04,
            "constellation": {"amplitudes": [[1,0],[0,1],[-1,0],[0,-1]], "priors": [0.25,0.25,0.25,0.25]},
            "nbar_s_per_selected_mode": 0.1, "trials": 100, "master_seed": 3}"#,
    )
    .unwrap();
    let out_path = dir.path().join("out.json");
    let out = covert(&[
        "simulate", "--config", config.to_str().unwrap(), "--output", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["seed"], 3);
    assert_eq!(doc["n"], 20000);

    std::fs::write(
        &config,
        r#"{"channel": {"eta": 0.5, "nbar_b": 1.0}, "n_modes": 20000, "delta_qre": 0.04,
            "constellation": {"amplitudes": [[1,0],[-1,0]], "priors": [0.2,0.8]},
            "nbar_s_per_selected_mode": 0.1, "trials": 100, "master_seed": 3}"#,
    )
    .unwrap();
    let out = covert(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn scaling_csv_columns_and_slope() {
    let rows = csv_rows(&covert(&["scaling", "--n", "1e4,1e5", "--trials", "300", "--seed", "1"]));
    assert_eq!(
        rows[0],
        ["n", "tau", "e_selected", "ser", "mi_nats", "m_bits", "willie_min_pe", "willie_pe_stderr"]
    );
    assert_eq!(rows.len(), 3);
    let doc = json(&covert(&["scaling", "--n", "1e4,1e5,1e6", "--trials", "1000", "--seed", "1", "--format", "json"]));
    let slope = doc["slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.05, "slope {slope}");
}

#[test]
fn selfcheck_passes_and_detects_faults() {
    let doc = json(&covert(&["selfcheck", "--format", "json"]));
    assert_eq!(doc["passed"], true);
    let out = Command::new(env!("CARGO_BIN_EXE_covert"))
        .arg("selfcheck")
        .env("BOSONIC_COVERT_SELFCHECK_FAULT", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
