//! End-to-end checks of the command-line surface: golden outputs, format
//! and flag handling, determinism, and exit codes.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crosspoly"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn poly_golden_outputs() {
    assert_eq!(
        stdout(&["poly", "--dim", "0"]),
        "{\"dim\": 0, \"coeffs\": [\"1\"]}\n"
    );
    assert_eq!(
        stdout(&["poly", "--dim", "1"]),
        "{\"dim\": 1, \"coeffs\": [\"1\", \"2\"]}\n"
    );
    assert_eq!(
        stdout(&["poly", "--dim", "2"]),
        "{\"dim\": 2, \"coeffs\": [\"1\", \"2\", \"2\"]}\n"
    );
}

#[test]
fn roots_small_dimensions() {
    let csv = stdout(&["roots", "--dim", "2"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "tau,err_radius");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("-0.5000000"));
    assert!(lines[2].starts_with("0.5000000"));

    let csv = stdout(&["roots", "--dim", "1"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0.0000"));
}

#[test]
fn roots_json_format() {
    let js = stdout(&["roots", "--dim", "3", "--format", "json"]);
    assert!(js.starts_with("{\"dim\": 3, \"precision\": 128, \"tau\": ["));
    assert!(js.contains("1.118033988"));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["roots", "--dim", "7"],
        vec!["asym", "--dim", "60", "--tau", "30"],
        vec!["largest", "--dim", "64"],
    ] {
        let a = stdout(&args);
        let b = stdout(&args);
        assert_eq!(a, b, "two runs of {args:?} differ");
    }
}

#[test]
fn precision_flag_and_env_agree() {
    let flagged = stdout(&["roots", "--dim", "2", "--precision", "96"]);
    let out = bin()
        .env("CROSSPOLY_PRECISION", "96")
        .args(["roots", "--dim", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(flagged, String::from_utf8(out.stdout).unwrap());

    // the flag wins over the environment
    let out = bin()
        .env("CROSSPOLY_PRECISION", "96")
        .args(["roots", "--dim", "2", "--precision", "128"])
        .output()
        .unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        stdout(&["roots", "--dim", "2", "--precision", "128"])
    );
}

#[test]
fn precision_below_minimum_fails() {
    let out = run(&["roots", "--dim", "2", "--precision", "32"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("precision"));
}

#[test]
fn bad_epsilon_fails() {
    let out = run(&["asym", "--dim", "60", "--tau", "30", "--epsilon", "0.7"]);
    assert!(!out.status.success());
}

#[test]
fn largest_below_minimum_dimension_fails() {
    let out = run(&["largest", "--dim", "5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("minimum dimension"));
}

#[test]
fn slow_gate_blocks_big_exact_runs() {
    let out = run(&["roots", "--dim", "400"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--slow"));

    let out = run(&["table1", "--dims", "100,400"]);
    assert!(!out.status.success());
}

#[test]
fn table1_header_only_for_empty_dims() {
    assert_eq!(stdout(&["table1", "--dims", ""]), "d,tau_max,f_over_cbrt\n");
}

#[test]
fn table1_certified_row_for_d100() {
    // certified by exact sign changes at tau +/- 2^-prec * tau
    let csv = stdout(&["table1", "--dims", "100"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d,tau_max,f_over_cbrt");
    assert_eq!(lines[1], "100,91.9969353008,1.7242080215");
}

#[test]
fn asym_json_shape() {
    let js = stdout(&["asym", "--dim", "100", "--tau", "50"]);
    assert!(js.contains("\"regime\": \"SADDLE\""));
    for key in ["\"alpha\": [0, -", "\"K2\": 8.66025403784438", "\"K3\": ", "\"I\": ["] {
        assert!(js.contains(key), "missing {key} in {js}");
    }

    let js = stdout(&["asym", "--dim", "100", "--tau", "1"]);
    assert!(js.contains("\"regime\": \"NEAR_ZERO\""));
    assert!(!js.contains("alpha"));
}

#[test]
fn compare_small_dimension_rows() {
    let csv = stdout(&["compare", "--dim", "2", "--max", "1", "--step", "0.5"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "tau,exact,asym,err");
    assert_eq!(lines.len(), 4, "three data rows for tau = 0, 0.5, 1");
    let exact: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(exact, vec!["0", "1", "1"]);
}

#[test]
fn count_reports_exact_and_asym() {
    let js = stdout(&["count", "--dim", "50", "--from", "0", "--to", "10"]);
    assert!(js.contains("\"exact\": 11"));
    assert!(js.contains("\"asym\": 10."));
}

#[test]
fn largest_with_exact_check() {
    let js = stdout(&["largest", "--dim", "100", "--check-exact"]);
    assert!(js.contains("\"tau_exact\": 91.9969353008"));
    // tau_hat within 0.5 of the exact value
    let tau_hat: f64 = js
        .split("\"tau_hat\": ")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((tau_hat - 91.9969353).abs() <= 0.5, "tau_hat = {tau_hat}");
}

#[test]
fn out_directory_receives_named_files() {
    let dir = std::env::temp_dir().join(format!("crosspoly_cli_test_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let out = bin()
        .args(["roots", "--dim", "2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "data goes to the file, not stdout");
    let body = std::fs::read_to_string(dir.join("roots_d2.csv")).unwrap();
    assert!(body.starts_with("tau,err_radius\n"));
    let _ = std::fs::remove_dir_all(&dir);
}
