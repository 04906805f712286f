//! Black-box tests of the command-line surface: argument handling,
//! exit codes, and artifact layout.

use std::path::Path;
use std::process::{Command, Output};

fn aggdiff(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggdiff"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn quick_run_args<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec![
        "run",
        "--preset",
        "heat-baseline",
        "--override",
        "grid.cells=128",
        "--override",
        "solver.tau_end=0.3",
        "--override",
        "diagnostics.with_e2=false",
    ];
    args.extend_from_slice(extra);
    args
}

#[test]
fn missing_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = aggdiff(&["run", "--config", "missing.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config not found"), "stderr: {stderr}");
}

#[test]
fn unknown_check_suite_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = aggdiff(&["check", "nosuchsuite"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_suite_prints_items_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = aggdiff(&["check", "lemma44-scaling"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS ")), "{stdout}");
}

#[test]
fn run_echoes_overrides_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_flag = out_dir.to_str().unwrap();
    let out = aggdiff(&quick_run_args(&["--out", out_flag]), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("summary json on stdout");
    assert_eq!(summary["config_echo"]["solver.tau_end"], "0.3");
    assert_eq!(summary["config_echo"]["grid.cells"], "128");
    assert!(out_dir.join("series.csv").exists());
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn rates_fits_a_stored_column_and_rejects_unknown_ones() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_flag = out_dir.to_str().unwrap();
    let run = aggdiff(
        &[
            "run",
            "--preset",
            "heat-baseline",
            "--override",
            "grid.cells=128",
            "--override",
            "solver.tau_end=2.0",
            "--override",
            "diagnostics.with_e2=false",
            "--out",
            out_flag,
        ],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(0));
    let series = out_dir.join("series.csv");
    let series = series.to_str().unwrap();

    let out = aggdiff(
        &["rates", series, "--column", "e1", "--window", "0.3:1.8"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let slope = fit["slope"].as_f64().unwrap();
    assert!(slope < -1.5, "pure-diffusion entropy slope was {slope}");

    let out = aggdiff(&["rates", series, "--column", "bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_directory_per_member() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.cfg");
    std::fs::write(
        &cfg,
        "grid.dim = 1\ngrid.cells = 128\ngrid.half_width = 10.0\nic.mean = 0.5\n\
         solver.tau_end = 0.3\ndiagnostics.with_e2 = false\n",
    )
    .unwrap();
    let out_dir = dir.path().join("batch");
    let out = aggdiff(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--preset",
            "heat-baseline",
            "--override",
            "solver.tau_end=0.3",
            "--override",
            "grid.cells=128",
            "--override",
            "diagnostics.with_e2=false",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for member in ["tiny", "heat-baseline"] {
        assert!(out_dir.join(member).join("summary.json").exists(), "{member}");
    }
}
