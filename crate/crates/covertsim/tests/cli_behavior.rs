//! End-to-end checks of the command-line surface: exit codes, diagnostics,
//! and the files a run leaves behind.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_covertsim")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("covertsim-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn unknown_subcommand_exits_2_with_usage() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "stderr was: {err}");
}

#[test]
fn malformed_config_exits_2_and_names_the_key() {
    let dir = scratch("badkey");
    let cfg = dir.join("c.json");
    write(&cfg, r#"{"solver": {"outer_tolerance": 1.0}}"#);
    let out = run(&["--config", cfg.to_str().unwrap(), "solve"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("solver") && err.contains("outer_tolerance"),
        "stderr was: {err}"
    );

    write(&cfg, r#"{"epsilon": 1.5}"#);
    let out = run(&["--config", cfg.to_str().unwrap(), "solve"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
}

#[test]
fn covert_infeasible_defaults_exit_3() {
    // the baseline 8 dBW jammer ceiling cannot meet the covertness budget
    let dir = scratch("infeasible");
    let out = run(&["--out", dir.join("o").to_str().unwrap(), "--seed", "3", "solve"]);
    assert_eq!(out.status.code(), Some(3));

    let cfg = dir.join("c.json");
    write(
        &cfg,
        r#"{"sweep": {"parameter": "d_ab", "values": [8, 9], "trials": 3}}"#,
    );
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("s").to_str().unwrap(),
        "sweep",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("infeasible"), "stderr was: {err}");
}

#[test]
fn solve_writes_record_and_echo() {
    let dir = scratch("solve");
    let cfg = dir.join("c.json");
    write(&cfg, r#"{"p_jmax_dbw": 20.0}"#);
    let out_dir = dir.join("o");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "11",
        "solve",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("solve.json")).unwrap())
            .unwrap();
    assert_eq!(record["seed"], 11);
    assert!(record["params_sha256"].as_str().unwrap().len() == 64);
    assert_eq!(record["result"]["status"]["kind"], "optimal");
    let p_j = record["result"]["allocation"]["p_j"].as_f64().unwrap();
    assert!((p_j - 1.0).abs() <= 1e-6);

    let echo: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("resolved_config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(echo["seed"], 11);
    assert_eq!(echo["params"]["p_jmax_dbw"], 20.0);
    assert_eq!(echo["params"]["alpha"], 2.0);
}

#[test]
fn sweep_requires_a_sweep_section() {
    let dir = scratch("nosweep");
    let out = run(&["--out", dir.join("o").to_str().unwrap(), "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep"));
}

#[test]
fn detect_csv_has_header_and_expected_columns() {
    let dir = scratch("detect");
    let out_dir = dir.join("o");
    let out = run(&["--out", out_dir.to_str().unwrap(), "detect"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(out_dir.join("detection_surface.csv")).unwrap();
    assert!(text.starts_with("# covertsim "));
    assert!(text.contains("# params_sha256 "));
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column row");
    assert_eq!(header, "d_aw,d_jw,lambda1,lambda2,min_error,covert_ok");
    assert!(!text.contains('\r'), "LF line endings only");
}

#[test]
fn reproduce_fig7_records_the_strong_jammer_ceiling() {
    let dir = scratch("fig7");
    let out_dir = dir.join("o");
    let out = run(&[
        "--out",
        out_dir.to_str().unwrap(),
        "--trials",
        "2",
        "reproduce",
        "fig7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(out_dir.join("fig7.csv")).unwrap();
    assert!(text.contains("# p_jmax_dbw 2.00000000000e1"));
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column row");
    assert_eq!(
        header,
        "p_max_dbw,mean_rate,mean_rate_bob,mean_rate_carol,se,outage,trials"
    );
    // nine sweep points from 2 to 10 dBW
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .count();
    assert_eq!(rows, 1 + 9);
}

#[test]
fn validate_subcommand_passes() {
    let dir = scratch("validate");
    let out = run(&["--out", dir.join("o").to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("ok   ")).count() >= 8);
    assert!(!stdout.contains("FAIL"));
}
