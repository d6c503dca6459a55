//! The `igt-lab` binary: argument handling and exit codes.

use std::process::{Command, Output};

fn igt_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igt-lab"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

#[test]
fn help_lists_every_command() {
    let out = igt_lab(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for c in ["synth", "bench", "ablate", "random-w", "verify"] {
        assert!(text.contains(c), "{c} missing from help");
    }
}

#[test]
fn verify_exit_codes_follow_the_outcome() {
    let tmp = tempfile::tempdir().unwrap();
    let clean = tmp.path().join("clean");
    let out = igt_lab(&["verify", "--trials", "1", "--seed", "3", "--out", clean.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("bounds satisfied"));
    let provenance = std::fs::read_to_string(clean.join("provenance.txt")).unwrap();
    assert!(provenance.contains("command = verify") && provenance.contains("seed = 3"));

    let faulty = tmp.path().join("faulty");
    let out = igt_lab(&["verify", "--trials", "1", "--out", faulty.to_str().unwrap(), "inject_fault=1.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn configuration_file_and_overrides_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("verify.cfg");
    std::fs::write(&cfg, "# bound checks\ntrials = 1\nseed = 9\n").unwrap();
    let out_dir = tmp.path().join("o");
    let out = igt_lab(&["verify", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let echo = std::fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(echo.contains("trials = 1"));
    assert!(std::fs::read_to_string(out_dir.join("provenance.txt")).unwrap().contains("seed = 9"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    let out = igt_lab(&["verify", "--out", out_dir.to_str().unwrap(), "frobnicate=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobnicate"));
    let missing = tmp.path().join("nowhere");
    let out = igt_lab(&["bench", "--out", out_dir.to_str().unwrap(), &format!("dataset={}", missing.display())]);
    assert_eq!(out.status.code(), Some(2));
    let out = igt_lab(&["verify", "not-a-pair"]);
    assert_eq!(out.status.code(), Some(2));
}
