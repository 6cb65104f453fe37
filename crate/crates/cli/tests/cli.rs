use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orthores"));
    cmd.env_remove("ORTHORES_SEED");
    cmd
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn qr_of_ones_column() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ones.csv", "1\n1\n1\n1\n");
    let doc = json(&run(&["qr", path_str(&input), "--policy", "standard"]));
    assert_eq!(doc["T"], serde_json::json!([[-2.0]]));
    assert_eq!(doc["rank_count"], 1);
    assert_eq!(doc["manifest"]["subcommand"], "qr");
    assert_eq!(doc["manifest"]["flags"]["policy"], "standard");
}

#[test]
fn malformed_cell_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.csv", "1,2\nabc,3\n");
    let out = run(&["qr", path_str(&input)]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("row 2") && msg.contains("column 1"), "{msg}");
}

#[test]
fn duplicate_column_is_rank_deficient() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "dup.csv", "1,1\n2,2\n3,3\n");
    let out = run(&["qr", path_str(&input)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 1"));
}

#[test]
fn ragged_rows_are_rejected() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ragged.csv", "1,2\n3\n");
    assert_eq!(run(&["residuals", path_str(&input)]).status.code(), Some(2));
}

#[test]
fn residuals_of_hand_example() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hand.csv", "one,t,y\n1,0,0\n1,1,0\n1,2,3\n");
    let doc = json(&run(&["residuals", path_str(&input)]));
    close(&floats(&doc["beta_hat"]), &[-0.5, 1.5], 1e-12);
    close(&floats(&doc["R"]), &[0.5, -1.0, 0.5], 1e-12);
    assert!((doc["rss"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(doc["manifest"]["flags"]["header"], "one,t,y");
}

#[test]
fn residuals_of_response_only_file_is_the_mean() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "2\n4\n9\n");
    let doc = json(&run(&["residuals", path_str(&input)]));
    close(&floats(&doc["beta_hat"]), &[5.0], 1e-12);
}

#[test]
fn empty_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "empty.csv", "");
    assert_eq!(run(&["residuals", path_str(&input)]).status.code(), Some(2));
}

#[test]
fn student_modes() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "1\n2\n3\n4\n");
    let minus = json(&run(&["indep", path_str(&input), "--mode", "student"]));
    close(&floats(&minus["W"]), &[0.0, 1.0, 2.0], 1e-14);
    assert_eq!(minus["wss"].as_f64(), Some(5.0));
    assert_eq!(minus["rss"].as_f64(), Some(5.0));
    assert_eq!(minus["manifest"]["flags"]["variant"], "minus");

    let plus = json(&run(&[
        "indep",
        path_str(&input),
        "--mode",
        "student",
        "--variant",
        "plus",
    ]));
    close(&floats(&plus["W"]), &[-2.0, -1.0, 0.0], 1e-14);
}

#[test]
fn mode_mismatch_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "1\n2\n3\n4\n");
    let out = run(&["indep", path_str(&input), "--mode", "univariate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "indep",
        path_str(&input),
        "--mode",
        "student",
        "--variant",
        "a",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn univariate_and_general_modes_preserve_sum_of_squares() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "ty.csv",
        "t,y\n0.3,1.2\n1.1,2.9\n2.0,4.1\n2.7,6.3\n4.2,7.7\n5.0,10.4\n",
    );
    for variant in ["a", "b"] {
        let doc = json(&run(&[
            "indep",
            path_str(&input),
            "--mode",
            "univariate",
            "--variant",
            variant,
        ]));
        let (w, r) = (doc["wss"].as_f64().unwrap(), doc["rss"].as_f64().unwrap());
        assert!((w - r).abs() <= 1e-10 * r);
        assert_eq!(floats(&doc["W"]).len(), 4);
    }

    let general = write(
        &dir,
        "xy.csv",
        "1,0.3,1.2\n1,1.1,2.9\n1,2.0,4.1\n1,2.7,6.3\n1,4.2,7.7\n1,5.0,10.4\n",
    );
    let doc = json(&run(&["indep", path_str(&general), "--rows", "2,4"]));
    assert_eq!(doc["manifest"]["selection"], serde_json::json!([2, 4]));
    let (w, r) = (doc["wss"].as_f64().unwrap(), doc["rss"].as_f64().unwrap());
    assert!((w - r).abs() <= 1e-10 * r);

    let out = run(&["indep", path_str(&general), "--rows", "4,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_and_validates_flags() {
    let args = [
        "simulate", "--n", "8", "--p", "2", "--reps", "200", "--seed", "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["manifest"]["seed"], 7);
    assert!(doc["report"]["max_ss_identity_error"].as_f64().unwrap() < 1e-10);

    let one = json(&run(&["simulate", "--n", "10", "--p", "2", "--reps", "1"]));
    assert!(one["report"]["max_ss_identity_error"].as_f64().unwrap() < 1e-10);

    assert_eq!(
        run(&["simulate", "--n", "10", "--p", "10"]).status.code(),
        Some(2)
    );
}

#[test]
fn seed_falls_back_to_environment() {
    let out = bin()
        .args(["simulate", "--n", "5", "--p", "1", "--reps", "3"])
        .env("ORTHORES_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(json(&out)["manifest"]["seed"], 42);
}

#[test]
fn check_passes_and_reports_injected_faults() {
    let doc = json(&run(&["check", "--n-grid", "5,20,100", "--trials", "20"]));
    assert!(doc["oracle_max_error"].as_f64().unwrap() < 1e-10);
    assert_eq!(doc["oracle"].as_array().unwrap().len(), 3);
    assert_eq!(doc["failed_checks"], serde_json::json!([]));

    let out = run(&["check", "--n-grid", "5", "--inject-fault", "ss-condition"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ss-condition"));
}

#[test]
fn bench_minimal_run() {
    let doc = json(&run(&[
        "bench",
        "--n-grid",
        "20,40",
        "--p",
        "2",
        "--repeats",
        "1",
    ]));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 6);
    assert!(doc["max_discrepancy"].as_f64().unwrap() < 1e-10);
    assert_eq!(run(&["bench", "--n-grid", "40,20"]).status.code(), Some(2));
}

#[test]
fn json_output_round_trips_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "xy.csv",
        "1,0.1,0.7\n1,0.2,1.9\n1,0.3,2.2\n1,0.7,3.1\n1,1.3,2.95\n",
    );
    let out_path = dir.path().join("fit.json");
    let out = run(&["residuals", path_str(&input), "--out", path_str(&out_path)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());

    let doc: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["manifest"]["output"], path_str(&out_path));

    let x = orthores::DenseMatrix::from_rows(&[
        vec![1.0, 0.1],
        vec![1.0, 0.2],
        vec![1.0, 0.3],
        vec![1.0, 0.7],
        vec![1.0, 1.3],
    ])
    .unwrap();
    let fit = orthores::fit_least_squares(&x, &[0.7, 1.9, 2.2, 3.1, 2.95]).unwrap();
    let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&floats(&doc["beta_hat"])), bits(&fit.beta_hat));
    assert_eq!(bits(&floats(&doc["R"])), bits(&fit.residuals));
    assert_eq!(doc["rss"].as_f64().unwrap().to_bits(), fit.rss.to_bits());
}
