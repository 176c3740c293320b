//! End-to-end checks of the command-line interface on the shipped configs.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ftcsim"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .args(args)
        .output()
        .expect("spawn ftcsim");
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn outdir(tag: &str) -> String {
    let dir = std::env::temp_dir().join(format!("ftcsim_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    dir.to_string_lossy().into_owned()
}

#[test]
fn spectrum_runs_and_is_deterministic() {
    let out = outdir("spectrum");
    let (ok, stdout, stderr) = run(&[
        "spectrum",
        "--config",
        &config("table_i_run.toml"),
        "--out",
        &out,
        "--levels",
        "3",
    ]);
    assert!(ok, "stderr: {stderr}");
    assert!(stdout.contains("summary.csv"), "stdout: {stdout}");
    let summary = std::fs::read_to_string(Path::new(&out).join("summary.csv")).unwrap();
    assert!(summary.contains("zeta"));
    assert!(summary.contains("f01_qubit1"));

    // byte-identical re-run
    let out2 = outdir("spectrum2");
    let (ok2, _, _) = run(&[
        "spectrum",
        "--config",
        &config("table_i_run.toml"),
        "--out",
        &out2,
        "--levels",
        "3",
    ]);
    assert!(ok2);
    let summary2 = std::fs::read_to_string(Path::new(&out2).join("summary.csv")).unwrap();
    assert_eq!(summary, summary2);
}

#[test]
fn zz_map_writes_grid() {
    let out = outdir("zzmap");
    let (ok, _, stderr) = run(&[
        "zz-map",
        "--config",
        &config("table_i_run.toml"),
        "--out",
        &out,
        "--levels",
        "3",
        "--threads",
        "2",
    ]);
    assert!(ok, "stderr: {stderr}");
    let map = std::fs::read_to_string(Path::new(&out).join("zz_map.csv")).unwrap();
    let data_lines =
        map.lines().filter(|l| !l.starts_with('#') && !l.starts_with("flux")).count();
    assert_eq!(data_lines, 21);
    assert!(map.lines().next().unwrap().starts_with("# generator = ftcsim"));
}

#[test]
fn gate_command_reports_infidelity() {
    let out = outdir("gate");
    let (ok, _, stderr) = run(&[
        "gate",
        "--config",
        &config("gate40_run.toml"),
        "--out",
        &out,
        "--levels",
        "3",
    ]);
    assert!(ok, "stderr: {stderr}");
    let report = std::fs::read_to_string(Path::new(&out).join("gate_report.csv")).unwrap();
    assert!(report.contains("infidelity"));
    assert!(report.contains("decoherence_error"));
    let ts = std::fs::read_to_string(Path::new(&out).join("gate_timeseries.csv")).unwrap();
    assert!(ts.lines().count() > 100);
}

#[test]
fn missing_section_is_a_clean_error() {
    let out = outdir("missing");
    let (ok, _, stderr) = run(&[
        "optimize",
        "--config",
        &config("table_i_run.toml"),
        "--out",
        &out,
    ]);
    assert!(!ok);
    assert!(stderr.contains("optimize"), "stderr: {stderr}");
}

#[test]
fn analyze_reports_closed_forms() {
    let out = outdir("analyze");
    let (ok, _, stderr) = run(&[
        "analyze",
        "--config",
        &config("table_i_run.toml"),
        "--out",
        &out,
    ]);
    assert!(ok, "stderr: {stderr}");
    let report = std::fs::read_to_string(Path::new(&out).join("gate_analysis.csv")).unwrap();
    assert!(report.contains("alpha_ghz"));
    assert!(report.contains("omega_d_order1_ghz"));
    assert!(report.contains("t_gate_order1_ns"));
}
