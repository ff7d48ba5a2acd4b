//! End-to-end checks of the `torsim` binary: exit codes, artifact layout,
//! and the config-file front door.

use std::path::Path;
use std::process::{Command, Output};

fn torsim(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torsim"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("binary spawns")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_builtin_writes_the_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = torsim(&["run", "drill-dc-hidden", "--t-end", "40"], dir.path());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("scenario drill-dc-hidden (drill_dc)"), "{text}");
    assert!(text.contains("artifacts:"), "{text}");
    for name in [
        "drill-dc-hidden.csv",
        "drill-dc-hidden.json",
        "drill-dc-hidden_plot.py",
    ] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
}

#[test]
fn unknown_target_exits_one_and_lists_the_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let out = torsim(&["run", "drill-dc-hiden"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let text = stderr(&out);
    assert!(text.contains("error:"), "{text}");
    assert!(text.contains("tora-capture"), "{text}");
    assert!(text.contains("drill-ind-b"), "{text}");
}

#[test]
fn list_names_all_six_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = torsim(&["list"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    for id in [
        "tora-capture",
        "tora-normal",
        "drill-dc-hidden",
        "drill-dc-normal",
        "drill-ind-a",
        "drill-ind-b",
    ] {
        assert!(text.contains(id), "missing {id} in:\n{text}");
    }
}

#[test]
fn config_file_renames_the_run_and_overrides_t_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    std::fs::write(
        &cfg,
        "[model]\n\
         scenario = drill-dc-hidden\n\
         id = short-run\n\
         \n\
         [integration]\n\
         t_end = 30\n\
         \n\
         [analysis]\n\
         classify = false\n",
    )
    .unwrap();
    let out = torsim(&["run", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let json = dir.path().join("short-run.json");
    assert!(json.is_file());
    let summary = torsim::io::import_summary(&json).unwrap();
    assert_eq!(summary.scenario, "short-run");
    assert_eq!(summary.integration.t_end, 30.0);
    assert!(summary.report.probes.is_empty());
}

#[test]
fn misspelled_config_key_exits_one_with_a_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.cfg");
    std::fs::write(
        &cfg,
        "[model]\nname = drill_dc\n\n[params]\nstiffnes = 0.07\n",
    )
    .unwrap();
    let out = torsim(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let text = stderr(&out);
    assert!(text.contains("k_theta"), "{text}");
}

#[test]
fn scan_writes_a_basin_map_over_the_requested_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = torsim(
        &[
            "scan",
            "drill-dc-normal",
            "--x",
            "omega_u:5:7:3",
            "--y",
            "omega_l:5:7:3",
            "--t-end",
            "40",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("scanned 3x3 cells"), "{text}");
    assert!(dir.path().join("drill-dc-normal-basin.json").is_file());
}

#[test]
fn scan_rejects_a_malformed_axis_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = torsim(
        &["scan", "drill-dc-normal", "--x", "omega_u:0:10", "--y", "omega_l:0:10:5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("coord:lo:hi:n"));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for flag in ["--help", "--version"] {
        let out = torsim(&[flag], dir.path());
        assert!(out.status.success(), "{flag} failed");
    }
}
