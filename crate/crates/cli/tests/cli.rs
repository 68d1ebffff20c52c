//! End-to-end runs of the `myfd` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn myfd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_myfd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Two measures on three points of a line.
fn measures() -> (TempDir, String, String) {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", r#"{"points": [[0], [1], [3]], "weights": [0.2, 0.5, 0.3]}"#);
    let b = write(dir.path(), "b.json", r#"{"points": [[0], [1], [3]], "weights": [0.4, 0.4, 0.2]}"#);
    (dir, a.display().to_string(), b.display().to_string())
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn divergence_reports_exact_estimate_and_gap() {
    let (_dir, a, b) = measures();
    let v = json(&myfd(&["divergence", "--phi", "kl", "--mu", &a, "--nu", &b]));
    let exact: f64 = [0.2f64, 0.5, 0.3]
        .iter()
        .zip([0.4, 0.4, 0.2])
        .map(|(m, n)| m * (m / n).ln())
        .sum();
    assert!((num(&v, "exact") - exact).abs() < 1e-12);
    assert!((num(&v, "estimate") - exact).abs() < 1e-8);
    assert!(num(&v, "gap").abs() < 1e-8);
}

#[test]
fn identical_measures_give_zero() {
    let (_dir, a, _) = measures();
    let v = json(&myfd(&["divergence", "--phi", "jensen_shannon", "--mu", &a, "--nu", &a]));
    assert_eq!(num(&v, "exact"), 0.0);
    assert!(num(&v, "estimate").abs() <= 1e-6);
}

#[test]
fn unknown_generator_is_an_input_error() {
    let (_dir, a, b) = measures();
    let out = myfd(&["divergence", "--phi", "unknown", "--mu", &a, "--nu", &b]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("reverse_kl") && err.contains("trivial"), "{err}");
}

#[test]
fn missing_file_and_bad_weights_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"points": [[0], [1]], "weights": [0.7, 0.7]}"#);
    let bad = bad.display().to_string();
    assert_eq!(myfd(&["divergence", "--phi", "kl", "--mu", "/nonexistent.json", "--nu", &bad]).status.code(), Some(2));
    assert_eq!(myfd(&["divergence", "--phi", "kl", "--mu", &bad, "--nu", &bad]).status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_three() {
    let (_dir, a, b) = measures();
    let out = myfd(&[
        "divergence", "--phi", "chi2", "--mu", &a, "--nu", &b, "--method", "gradient", "--lr", "1.7976931348623157e308", "--iters", "10",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn kl_conjugate_of_zero_potential() {
    let v = json(&myfd(&["conjugate", "--phi", "kl", "--f", "0,0", "--nu", "0.5,0.5"]));
    assert_eq!(num(&v, "gamma"), 0.0);
    assert_eq!(num(&v, "value"), 0.0);
    assert_eq!(v["gradient"], serde_json::json!([0.5, 0.5]));
}

#[test]
fn kl_newton_shift_matches_the_closed_form() {
    let v = json(&myfd(&["conjugate", "--phi", "kl", "--f=-1.5,2,0.25,4", "--nu", "0.1,0.2,0.3,0.4"]));
    let f = [-1.5f64, 2.0, 0.25, 4.0];
    let nu = [0.1, 0.2, 0.3, 0.4];
    let lse = f.iter().zip(nu).map(|(v, w)| w * v.exp()).sum::<f64>().ln();
    let cmp = &v["gamma_comparison"];
    assert!(num(cmp, "diff") <= 1e-10);
    assert!((num(cmp, "newton") - lse).abs() <= 1e-10);
}

#[test]
fn total_variation_uses_the_closed_form() {
    let (_dir, _, b) = measures();
    let v = json(&myfd(&["conjugate", "--phi", "total_variation", "--f=-1,2,0.5", "--nu", &b]));
    assert_eq!(v["solver"], "closed-form");
}

#[test]
fn potential_can_come_from_a_file() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "f.json", "[0.0, 1.0]");
    let v = json(&myfd(&["conjugate", "--phi", "chi2", "--f", &f.display().to_string(), "--nu", "0.5,0.5"]));
    assert!(v["value"].is_f64());
}

#[test]
fn trivial_generator_matches_squared_w1() {
    let (_dir, a, b) = measures();
    let v = json(&myfd(&["my", "--phi", "trivial", "--mu", &a, "--nu", &b, "--alpha", "2", "--lambda", "1.5"]));
    // Cumulative-distribution oracle on the line 0, 1, 3.
    let w1 = (0.2f64 - 0.4).abs() * 1.0 + (0.7f64 - 0.8).abs() * 2.0;
    let expected = 1.5 * w1 * w1;
    assert!((num(&v, "w1") - w1).abs() < 1e-12);
    for route in ["primal", "dual"] {
        let value = num(&v[route], "value");
        assert!((value - expected).abs() <= 0.01 * expected, "{route}: {value} vs {expected}");
    }
    assert_eq!(v["structure"]["pass"], true);
}

#[test]
fn equal_measures_give_zero_on_both_routes() {
    let (_dir, a, _) = measures();
    let v = json(&myfd(&["my", "--phi", "kl", "--mu", &a, "--nu", &a, "--lambda", "1"]));
    assert_eq!(num(&v["primal"], "value"), 0.0);
    assert_eq!(num(&v["dual"], "value"), 0.0);
}

#[test]
fn infinite_alpha_requires_beta() {
    let (_dir, a, b) = measures();
    let out = myfd(&["my", "--phi", "kl", "--mu", &a, "--nu", &b, "--alpha", "inf", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&myfd(&["my", "--phi", "kl", "--mu", &a, "--nu", &b, "--alpha", "inf", "--beta", "10"]));
    assert_eq!(num(&v["primal"], "value"), 0.0);
}

#[test]
fn measures_on_different_spaces_are_rejected() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", r#"{"points": [[0], [1]], "weights": [0.5, 0.5]}"#);
    let b = write(dir.path(), "b.json", r#"{"points": [[0], [2]], "weights": [0.5, 0.5]}"#);
    let out = myfd(&["my", "--phi", "kl", "--mu", &a.display().to_string(), "--nu", &b.display().to_string(), "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_output_is_written_to_a_file() {
    let (dir, a, b) = measures();
    let out = dir.path().join("my.csv");
    let run = myfd(&[
        "my", "--phi", "chi2", "--mu", &a, "--nu", &b, "--lambda", "1", "--format", "csv", "--out", &out.display().to_string(),
    ]);
    assert!(run.status.success());
    assert!(run.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "route,value,converged,iterations,method,point");
    assert!(lines[1].starts_with("primal,") && lines[2].starts_with("dual,"));
}

#[test]
fn output_is_deterministic() {
    let (_dir, a, b) = measures();
    let args = ["my", "--phi", "jensen_shannon", "--mu", &a, "--nu", &b, "--alpha", "2", "--lambda", "0.7"];
    assert_eq!(myfd(&args).stdout, myfd(&args).stdout);
    let args = ["gaussian", "--phi", "kl", "--grid-n", "64", "--format", "csv"];
    assert_eq!(myfd(&args).stdout, myfd(&args).stdout);
}

#[test]
fn gaussian_csv_has_one_row_per_grid_point() {
    let out = myfd(&["gaussian", "--phi", "chi2", "--grid-n", "128", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "x,f_learned,f_closed");
    assert_eq!(lines.len(), 129);
}

#[test]
fn gaussian_rejects_non_legendre_generators() {
    let out = myfd(&["gaussian", "--phi", "total_variation"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_filter_runs_only_the_gaussian_suite() {
    let v = json(&myfd(&["selftest", "--filter", "gaussian"]));
    assert_eq!(v["pass"], true);
    let criteria = v["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 1);
    assert_eq!(criteria[0]["key"], "gaussian");
}

#[test]
fn selftest_passes() {
    let v = json(&myfd(&["selftest"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 10);
}

#[test]
fn selftest_detects_a_corrupted_table() {
    let out = myfd(&["selftest", "--perturb", "kl", "--filter", "categorical"]);
    assert_ne!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn selftest_rejects_unknown_filters() {
    assert_eq!(myfd(&["selftest", "--filter", "nothing"]).status.code(), Some(2));
}
