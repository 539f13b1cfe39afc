//! End-to-end checks of the command-line interface: file layout, exit
//! codes, overwrite policy, and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_duohopf"))
}

fn baseline_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/baseline.cfg")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("duohopf-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn curves_writes_per_mode_files() {
    let out = tmpdir("curves");
    let cfg = baseline_config();
    let result = run(&[
        "curves",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--window",
        "20,20",
        "--modes",
        "5",
    ]);
    assert!(result.status.success(), "{result:?}");
    for n in 0..=5 {
        let text = fs::read_to_string(out.join(format!("curves_n{n}.csv"))).unwrap();
        let rows = text.lines().count();
        assert_eq!(text.lines().next().unwrap(), "n,j,sign,j1,j2,omega,tau1,tau2");
        if n <= 3 {
            assert!(rows > 1, "mode {n} should have curve samples");
        } else {
            assert_eq!(rows, 1, "mode {n} should be header-only");
        }
    }
    assert!(out.join("run_manifest.txt").exists());
}

#[test]
fn zero_window_is_a_usage_error() {
    let out = tmpdir("zero-window");
    let cfg = baseline_config();
    let result = run(&[
        "curves",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--window",
        "0,0",
    ]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn rerun_without_overwrite_is_refused() {
    let out = tmpdir("overwrite");
    let cfg = baseline_config();
    let args = [
        "curves",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--window",
        "5,3",
        "--modes",
        "0",
    ];
    assert!(run(&args).status.success());
    let second = run(&args);
    assert_eq!(second.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&second.stderr);
    assert!(stderr.contains("--overwrite"), "stderr: {stderr}");
    let mut with_flag: Vec<&str> = args.to_vec();
    with_flag.push("--overwrite");
    assert!(run(&with_flag).status.success());
}

#[test]
fn identical_runs_are_byte_identical() {
    let cfg = baseline_config();
    let out_a = tmpdir("det-a");
    let out_b = tmpdir("det-b");
    for out in [&out_a, &out_b] {
        let result = run(&[
            "curves",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--window",
            "5,3",
            "--modes",
            "1",
        ]);
        assert!(result.status.success());
    }
    for name in ["curves_n0.csv", "curves_n1.csv", "connectivity_n0.csv"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn config_errors_name_the_line() {
    let out = tmpdir("bad-config");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("bad.cfg");
    fs::write(&cfg, "r1 = 0.8\nr2 = 1\nbogus = 3\n").unwrap();
    let result = run(&[
        "curves",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
    assert!(stderr.contains("bogus"));
}

#[test]
fn hh_exit_codes_distinguish_found_and_none() {
    let cfg = baseline_config();
    let out = tmpdir("hh-found");
    let result = run(&[
        "hh",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--window",
        "5,3",
    ]);
    assert!(result.status.success(), "{result:?}");
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("[stability boundary]"));
    let text = fs::read_to_string(out.join("hh.csv")).unwrap();
    assert!(text.lines().count() > 1);

    // a window that excludes the reference point finds nothing
    let out = tmpdir("hh-none");
    let result = run(&[
        "hh",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--window",
        "2,1",
    ]);
    assert_eq!(result.status.code(), Some(4));
}

#[test]
fn classify_requires_k_coefficients() {
    let out = tmpdir("classify-nok");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("params-only.cfg");
    fs::write(
        &cfg,
        "r1 = 0.8\nr2 = 1\na = 1.3\nK = 0.7\ngamma = 1\nm = 0.27\nl = 2\nd1 = 0.3\nd2 = 0.4\n",
    )
    .unwrap();
    let result = run(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--hh",
        "3.9042,1.406,0.61081,0.94964",
    ]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("K11_re"), "stderr: {stderr}");
}

#[test]
fn classify_reports_case_and_semilines() {
    let cfg = baseline_config();
    let out = tmpdir("classify");
    let result = run(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--hh",
        "3.904173,1.405996,0.610808,0.949640",
        "--probe",
        "3.82,1.4345",
    ]);
    assert!(result.status.success(), "{result:?}");
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("unfolding case: VIa"));
    assert!(stdout.contains("D4"));
    let semis = fs::read_to_string(out.join("semilines.csv")).unwrap();
    assert_eq!(semis.lines().count(), 9); // header + L1..L8
    assert!(out.join("classify_report.txt").exists());
}

#[test]
fn simulate_rejects_unknown_section() {
    let cfg = baseline_config();
    let out = tmpdir("sim-bad");
    let result = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--tau1",
        "1.74",
        "--tau2",
        "0.67",
        "--section",
        "sideways",
    ]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn simulate_classifies_stable_point() {
    let cfg = baseline_config();
    let out = tmpdir("sim-eq");
    let result = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--tau1",
        "1.74",
        "--tau2",
        "0.67",
        "--t-end",
        "900",
        "--transient",
        "300",
        "--svg",
    ]);
    assert!(result.status.success(), "{result:?}");
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("classification: equilibrium"));
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next().unwrap(), "t,u0,v0,u0_lag");
    assert!(traj.lines().count() > 100);
    assert!(out.join("poincare.csv").exists());
    assert!(out.join("phase.svg").exists());
}
