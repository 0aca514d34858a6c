//! Exit codes and outputs of the `fkdv` binary.

use std::path::Path;
use std::process::{Command, Output};

fn fkdv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkdv"))
        .args(args)
        .env("FKDV_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SMOKE: &str = r#"
alpha = 0.5

[grid]
n_points = 256
half_length = 20.0

[solver]
dt = 0.01
t_final = T_FINAL

[initial_data]
kind = "gaussian"
amplitude = 0.5
width = 2.0

[[windows]]
x0 = 0.0
epsilon = 0.5
b = 2.5
tau = 2.5
v = 1.0

[ladder]
m = 2

[output]
cadence = 10
directory = "unused"
"#;

#[test]
fn ladder_prints_plan() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkdv(&["ladder", "0.5", "2"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("2.75"));
}

#[test]
fn verify_weights_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fkdv(&["verify-weights"], dir.path())), 0);
}

#[test]
fn missing_config_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkdv(&["run", "does-not-exist.toml"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fkdv(&["frobnicate"], dir.path())), 2);
}

#[test]
fn invalid_window_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SMOKE.replace("T_FINAL", "1.0").replace("b = 2.5", "b = 1.0")).unwrap();
    let o = fkdv(&["run", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("b ≥ 5ε"));
}

#[test]
fn run_then_resume_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.toml");
    let second = dir.path().join("second.toml");
    std::fs::write(&first, SMOKE.replace("T_FINAL", "0.5")).unwrap();
    std::fs::write(&second, SMOKE.replace("T_FINAL", "1.0")).unwrap();

    let out1 = dir.path().join("out1");
    let o = fkdv(&["run", first.to_str().unwrap()], &out1);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["energy.csv", "smoothing.csv", "conserved.csv", "report.jsonl", "final.fkdv"] {
        assert!(out1.join(f).exists(), "missing {f}");
    }
    let header = std::fs::read_to_string(out1.join("energy.csv")).unwrap();
    assert!(header.starts_with("t,"));

    let out2 = dir.path().join("out2");
    let snap = out1.join("final.fkdv");
    let o = fkdv(&["resume", snap.to_str().unwrap(), second.to_str().unwrap()], &out2);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out2.join("final.fkdv").exists());
    let snap2 = fkdv_core::experiment_io::read_snapshot(&out2.join("final.fkdv")).unwrap();
    assert_eq!(snap2.step_count, 100);
}

#[test]
fn corrupt_snapshot_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, SMOKE.replace("T_FINAL", "1.0")).unwrap();
    let snap = dir.path().join("bad.fkdv");
    std::fs::write(&snap, b"not a snapshot").unwrap();
    let o = fkdv(&["resume", snap.to_str().unwrap(), cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code(&o), 2);
}
