//! End-to-end checks of the binary: exit codes, output formats, file
//! handling.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_histpeg")
}

fn sample_scenario() -> PathBuf {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.join("scenarios/qubit_interference.json")
}

#[test]
fn peg_subcommand_reports_values_and_exits_zero() {
    let out = Command::new(exe())
        .arg("peg")
        .arg(sample_scenario())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("peg.value.up-up"));
    assert!(text.contains("\"failures\": 0"));
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["seed"], 7);
}

#[test]
fn csv_format_flattens_residuals() {
    let out = Command::new(exe())
        .arg("peg")
        .arg(sample_scenario())
        .args(["--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,digest,status,tolerance,residual,value,seed"));
    assert!(text.lines().count() > 4);
}

#[test]
fn parse_failure_exits_two_with_location() {
    let dir = std::env::temp_dir().join("histpeg-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("broken.json");
    std::fs::write(&bad, "{\n  \"base_dim\": 2,\n").unwrap();
    let out = Command::new(exe()).arg("peg").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line"), "stderr: {err}");
}

#[test]
fn suite_needs_a_source_of_scenarios() {
    let out = Command::new(exe()).arg("suite").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_from_file_writes_report_to_path() {
    let dir = std::env::temp_dir().join("histpeg-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("report.json");
    let out = Command::new(exe())
        .arg("suite")
        .arg(sample_scenario())
        .args(["--out", out_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(&out_path).unwrap();
    assert!(report.contains("algebra.trace-identity"));
    assert!(report.contains("\"failures\": 0"));
}

#[test]
fn seed_and_order_flags_override_the_file() {
    let out = Command::new(exe())
        .arg("peg")
        .arg(sample_scenario())
        .args(["--seed", "99", "--order", "real-total"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(parsed["seed"], 99);
    assert_eq!(parsed["order"], "real-total");
}

#[test]
fn timings_flag_adds_runtime_record() {
    let out = Command::new(exe())
        .arg("peg")
        .arg(sample_scenario())
        .arg("--timings")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("meta.runtime"));
    assert!(text.contains("wall_time_ms"));
}
