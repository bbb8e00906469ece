use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const CALL_TIMES: &str = "1.34 0.14 0.33 1.68 1.86 1.31 0.83 0.33 2.20 0.62 3.20 1.38 0.96 0.28 0.44 0.59 \
    0.25 0.51 1.61 1.85 0.47 0.41 1.46 0.09 2.18 0.07 0.02 0.64 0.28 0.68 1.07 3.25 \
    0.59 2.39 0.27 0.34 2.18 0.41 1.08 0.57 0.35 0.69 0.25 0.57 1.90 0.56 0.09 0.28";

fn recgof(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recgof"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = recgof(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn record_file(dir: &TempDir, name: &str, r: &[f64], k: &[u64]) {
    let records: Vec<Value> = r.iter().zip(k).map(|(r, k)| json!({"r": r, "k": k})).collect();
    let n: u64 = k.iter().sum();
    let body = json!({"scheme": "random", "n": n, "records": records});
    write(dir, name, &body.to_string());
}

fn call_times_setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "calls.txt", &CALL_TIMES.split_whitespace().collect::<Vec<_>>().join("\n"));
    ok(dir.path(), &["extract", "calls.txt", "-o", "calls.json"]);
    dir
}

/// A table holding reference critical values at the 0.95 level.
fn reference_table(dir: &TempDir) {
    let mut rows = Vec::new();
    for (n, ks, cm, ds) in [(20, 0.9502, 5.7196, 31.9874), (50, 0.9743, 15.4166, 110.7805)] {
        for (stat, value) in [("ks", ks), ("cm", cm), ("ds", ds)] {
            rows.push(json!({"n": n, "statistic": stat, "gamma": 0.95, "value": value}));
        }
    }
    let table = json!({
        "meta": {"M": 100000, "seed": 0, "min_records": 2, "engine_version": "0.1.0"},
        "rows": rows,
    });
    write(dir, "table.json", &table.to_string());
}

fn close(v: &Value, want: f64, tol: f64) {
    let got = v.as_f64().unwrap();
    assert!((got - want).abs() <= tol, "got {got}, want {want}");
}

#[test]
fn extract_reproduces_record_table() {
    let dir = call_times_setup();
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("calls.json")).unwrap()).unwrap();
    assert_eq!(rec["scheme"], "random");
    assert_eq!(rec["n"], 48);
    let r: Vec<f64> = rec["records"].as_array().unwrap().iter().map(|x| x["r"].as_f64().unwrap()).collect();
    let k: Vec<u64> = rec["records"].as_array().unwrap().iter().map(|x| x["k"].as_u64().unwrap()).collect();
    assert_eq!(r, vec![1.34, 0.14, 0.09, 0.07, 0.02]);
    assert_eq!(k, vec![1, 22, 2, 1, 22]);

    let out = ok(dir.path(), &["extract", "calls.txt", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("r,k"));
    assert_eq!(text.lines().nth(2), Some("0.14,22"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m = 5, n = 48"));
}

#[test]
fn extract_single_value_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "one.txt", "5.0\n");
    let rec = stdout_json(&ok(dir.path(), &["extract", "one.txt"]));
    assert_eq!(rec["records"], json!([{"r": 5.0, "k": 1}]));

    write(&dir, "bad.txt", "1\n2\n3\n4\n5\n6\nabc\n8\n");
    let out = recgof(dir.path(), &["extract", "bad.txt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 7"));
    assert!(out.stdout.is_empty());

    write(&dir, "empty.txt", "");
    assert!(!recgof(dir.path(), &["extract", "empty.txt"]).status.success());
    assert!(!recgof(dir.path(), &["extract", "missing.txt"]).status.success());
}

#[test]
fn fit_reports_reference_estimates() {
    let dir = call_times_setup();
    let report = stdout_json(&ok(dir.path(), &["fit", "calls.json", "--model", "both"]));
    assert_eq!(report["input"], json!({"path": "calls.json", "scheme": "random", "n": 48, "m": 5}));
    let fits = report["fits"].as_array().unwrap();
    assert_eq!(fits[0]["model"], "weibull");
    close(&fits[0]["alpha"], 1.1815, 5e-4);
    close(&fits[0]["sigma"], 0.8181, 5e-4);
    assert_eq!(fits[1]["model"], "exponential");
    close(&fits[1]["sigma"], 1.022, 1e-3);

    let exp = stdout_json(&ok(dir.path(), &["fit", "calls.txt", "--sample", "--model", "exponential"]));
    assert_eq!(exp["fits"].as_array().unwrap().len(), 1);
    close(&exp["fits"][0]["sigma"], 1.022, 1e-12);
}

#[test]
fn weibull_fit_needs_two_records() {
    let dir = tempfile::tempdir().unwrap();
    record_file(&dir, "one.json", &[5.0], &[3]);
    let out = recgof(dir.path(), &["fit", "one.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least two"));
    ok(dir.path(), &["fit", "one.json", "--model", "exponential"]);
    assert!(!recgof(dir.path(), &["glr", "one.json"]).status.success());
}

#[test]
fn glr_p_values_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    record_file(&dir, "ex1.json", &[1.34, 0.14, 0.09, 0.07, 0.02], &[1, 22, 2, 1, 22]);
    record_file(&dir, "ex2.json", &[50.0, 44.0, 22.0, 3.0], &[1, 3, 2, 18]);
    record_file(&dir, "ex3.json", &[0.879, 0.765, 0.735, 0.220], &[3, 2, 2, 23]);
    for (file, p, reject) in [("ex1.json", 0.53248, false), ("ex2.json", 0.20872, false), ("ex3.json", 0.00491, true)] {
        let out = ok(dir.path(), &["glr", file]);
        let report = stdout_json(&out);
        let test = &report["tests"][0];
        assert_eq!(test["statistic"], "glr");
        close(&test["p_value"], p, 5e-6);
        assert_eq!(test["reject"], reject);
        assert_eq!(test["fits"], json!([0, 1]));
        close(&test["critical"], 3.841458820694124, 1e-9);
        assert!(String::from_utf8_lossy(&out.stderr).contains("p = "));
    }
    let out = ok(dir.path(), &["glr", "ex1.json", "-q"]);
    assert!(out.stderr.is_empty());
    let report = stdout_json(&out);
    close(&report["tests"][0]["value"], 0.3896630654, 5e-7);
}

#[test]
fn test_accepts_weibull_for_call_times() {
    let dir = call_times_setup();
    reference_table(&dir);
    let report = stdout_json(&ok(
        dir.path(),
        &["test", "calls.json", "--table", "table.json", "--table-n", "50", "--gamma", "0.05"],
    ));
    let tests = report["tests"].as_array().unwrap();
    assert_eq!(tests.len(), 3);
    for (t, stat) in tests.iter().zip(["ks", "cm", "ds"]) {
        assert_eq!(t["statistic"], stat);
        assert_eq!(t["reject"], false);
        assert_eq!(t["fits"], json!([0]));
    }
    close(&tests[0]["value"], 0.6979, 0.01);
    close(&tests[1]["value"], 5.5140, 0.01);
    close(&tests[2]["value"], 8.8604, 0.01);
    close(&tests[0]["critical"], 0.9743, 0.0);
    assert_eq!(report["table"]["lookup_n"], 50);
    assert_eq!(report["table"]["meta"]["M"], 100000);
    assert_eq!(report["fits"][0]["source"], "mle");
}

#[test]
fn test_table_lookup_contract() {
    let dir = call_times_setup();
    reference_table(&dir);
    // n = 48 is not tabulated.
    let out = recgof(dir.path(), &["test", "calls.json", "--table", "table.json"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n = 48") && err.contains("ks"), "{err}");

    // Interpolating between 20 and 50.
    let report = stdout_json(&ok(dir.path(), &["test", "calls.json", "--table", "table.json", "--interpolate-n"]));
    let want = 0.9502 + (0.9743 - 0.9502) * 28.0 / 30.0;
    close(&report["tests"][0]["critical"], want, 1e-12);
    assert_eq!(report["table"]["interpolated"], true);

    // Level not in the table.
    let out = recgof(dir.path(), &["test", "calls.json", "--table", "table.json", "--table-n", "50", "--gamma", "0.1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.9"));

    // Nothing requested.
    let out = ok(dir.path(), &["test", "calls.json", "--table", "table.json", "--stats", ""]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let report = stdout_json(&out);
    assert_eq!(report["tests"], json!([]));
    assert_eq!(report["warnings"].as_array().unwrap().len(), 1);

    let out = recgof(dir.path(), &["test", "calls.json", "--table", "table.json", "--stats", "ks,xx"]);
    assert!(!out.status.success());
}

#[test]
fn rejection_keeps_exit_status_zero() {
    let dir = call_times_setup();
    reference_table(&dir);
    // A badly wrong fixed model is rejected; the run still succeeds.
    let out = ok(
        dir.path(),
        &["test", "calls.json", "--table", "table.json", "--table-n", "50", "--alpha", "5", "--sigma", "0.05", "--stats", "ks"],
    );
    let report = stdout_json(&out);
    assert_eq!(report["tests"][0]["reject"], true);
    assert_eq!(report["fits"][0]["source"], "fixed");
    assert!(!report["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn emits_steps_and_likelihood_grid() {
    let dir = call_times_setup();
    ok(
        dir.path(),
        &["fit", "calls.json", "--emit-steps", "steps.csv", "--emit-loglik-grid", "grid.csv", "--grid-steps", "11"],
    );
    let steps = std::fs::read_to_string(dir.path().join("steps.csv")).unwrap();
    let lines: Vec<&str> = steps.lines().collect();
    assert_eq!(lines[0], "i,r,k,phi,surv,model_surv");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("1,0.02,22,"));
    assert!(lines[5].starts_with("5,1.34,1,0.0,0.0,"));

    let grid = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 121);
    assert_eq!(grid.lines().next(), Some("alpha,sigma,loglik"));

    ok(
        dir.path(),
        &["fit", "calls.json", "--model", "exponential", "--emit-loglik-grid", "g2.csv", "--grid-alpha", "0.5,2", "--grid-sigma", "0.5,1.5", "--grid-steps", "3"],
    );
    let g2 = std::fs::read_to_string(dir.path().join("g2.csv")).unwrap();
    assert!(g2.lines().nth(1).unwrap().starts_with("0.5,0.5,"));
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str, workers: &'static str| {
        vec!["simulate", "--n", "5,10", "--reps", "300", "--seed", "9", "--workers", workers, "-o", out, "-q"]
    };
    ok(dir.path(), &args("a.json", "1"));
    ok(dir.path(), &args("b.json", "1"));
    ok(dir.path(), &args("c.json", "4"));
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    assert_eq!(a, std::fs::read(dir.path().join("c.json")).unwrap());
    let table: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(table["meta"]["M"], 300);
    assert_eq!(table["meta"]["seed"], 9);
    assert!(table["meta"].get("generated_at").is_none());
    assert_eq!(table["rows"].as_array().unwrap().len(), 2 * 3 * 9);
}

#[test]
fn simulate_outputs_and_degenerate_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["simulate", "--n", "5", "--levels", "0.05,0.95", "--reps", "1", "--csv", "t.csv"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulating n = 5"));
    let table = stdout_json(&out);
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0]["value"], rows[1]["value"]);
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,statistic,0.05,0.95"));

    let out = ok(dir.path(), &["simulate", "--n", "5", "--reps", "2", "--format", "csv", "--timestamp", "-q"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("n,statistic,"));
    let stamped = stdout_json(&ok(dir.path(), &["simulate", "--n", "5", "--reps", "2", "--timestamp", "-q"]));
    assert!(stamped["meta"]["generated_at"].is_string());

    assert!(!recgof(dir.path(), &["simulate", "--n", "1", "--reps", "10"]).status.success());
    assert!(!recgof(dir.path(), &["simulate", "--levels", "1.5", "--reps", "10"]).status.success());
    assert!(!recgof(dir.path(), &["simulate", "--n", "5", "--reps", "10", "-o", "no/such/dir/t.json"]).status.success());
}

#[test]
fn simulated_table_drives_test() {
    let dir = call_times_setup();
    ok(dir.path(), &["simulate", "--n", "48", "--reps", "500", "-o", "t.json", "-q"]);
    let report = stdout_json(&ok(dir.path(), &["test", "calls.json", "--table", "t.json"]));
    assert_eq!(report["tests"].as_array().unwrap().len(), 3);
    assert_eq!(report["table"]["meta"]["M"], 500);
}

#[test]
fn report_rerun_reproduces_payload() {
    let dir = call_times_setup();
    reference_table(&dir);
    let first = stdout_json(&ok(
        dir.path(),
        &["test", "calls.json", "--table", "table.json", "--table-n", "50", "--deterministic"],
    ));
    assert!(first.get("duration_seconds").is_none());
    let argv: Vec<String> = first["argv"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
    let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
    let second = stdout_json(&ok(dir.path(), &argv));
    assert_eq!(first, second);

    let timed = stdout_json(&ok(dir.path(), &["glr", "calls.json"]));
    assert!(timed["duration_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn csv_report_and_output_file() {
    let dir = call_times_setup();
    ok(dir.path(), &["glr", "calls.json", "--format", "csv", "-o", "glr.csv", "-q"]);
    let text = std::fs::read_to_string(dir.path().join("glr.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("statistic,value,gamma,critical,reject,p_value"));
    assert!(text.lines().nth(1).unwrap().starts_with("glr,"));

    let out = ok(dir.path(), &["fit", "calls.json", "--format", "csv", "-q"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("model,alpha,sigma,loglik,iterations,residual"));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!recgof(dir.path(), &[]).status.success());
    assert!(!recgof(dir.path(), &["fit"]).status.success());
    assert!(!recgof(dir.path(), &["test", "x.json", "--table", "t.json", "--alpha", "2"]).status.success());
    let out = ok(dir.path(), &["--version"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("recgof"));
}
