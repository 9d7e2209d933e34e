//! End-to-end tests of the `bbfs` binary: exit-code contract, output
//! determinism across scan modes and thread counts, and report round-trips.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bbfs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bbfs"))
}

fn run(args: &[&str]) -> Output {
    bbfs().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["scan", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(64), "usage errors exit 64");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    for sub in [
        "norm", "scan", "limit", "strong", "maximal", "kconst", "apconst", "verify", "report",
    ] {
        assert_eq!(run(&[sub, "--help"]).status.code(), Some(0), "{sub} --help");
    }
}

#[test]
fn kconst_prints_agreeing_closed_form_and_quadrature() {
    let out = run(&["kconst", "--q", "2", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("JSON output");
    let closed = v["closed_form"].as_f64().unwrap();
    let quad = v["quadrature"].as_f64().unwrap();
    assert!((closed - std::f64::consts::PI).abs() <= 1e-12);
    assert!((closed - quad).abs() <= 1e-8);
}

#[test]
fn norm_of_the_unit_hat_matches_the_closed_form() {
    let out = run(&[
        "norm",
        "--space",
        r#"{"space":"lebesgue","p":2}"#,
        "--function",
        "hat",
        "--n",
        "2049",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: f64 = stdout(&out).trim().parse().expect("a bare number");
    // ‖hat‖_{L²} = √(2/3) exactly; trapezoid quadrature at 2049 nodes is
    // well inside 1e-4.
    assert!((value - (2.0f64 / 3.0).sqrt()).abs() <= 1e-4, "{value}");
}

#[test]
fn scan_modes_are_bit_identical_and_threads_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();
    let base = [
        "scan",
        "--n",
        "257",
        "--q",
        "1",
        "--s",
        "1",
        "--lambda-points",
        "24",
    ];

    let mut brute: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    brute.extend(["--mode", "brute", "--out", &path("brute.csv")].map(String::from));
    let mut accel: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    accel.extend(["--mode", "accelerated", "--out", &path("accel.csv")].map(String::from));
    let mut accel_t1: Vec<String> = vec!["--threads".into(), "1".into()];
    accel_t1.extend(base.iter().map(|s| s.to_string()));
    accel_t1.extend(["--mode", "accelerated", "--out", &path("accel_t1.csv")].map(String::from));

    for args in [&brute, &accel, &accel_t1] {
        let out = bbfs().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let b = fs::read(path("brute.csv")).unwrap();
    let a = fs::read(path("accel.csv")).unwrap();
    let a1 = fs::read(path("accel_t1.csv")).unwrap();
    assert_eq!(a, b, "brute and accelerated scans must agree byte-for-byte");
    assert_eq!(a, a1, "thread count must not change scan output");
    let text = String::from_utf8(b).unwrap();
    assert!(text.starts_with("lambda,value,r_max_cells,pairs\n"));
    assert!(text.ends_with('\n'));
    for row in text.lines().skip(1) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4, "row {row}");
        for f in &fields[..3] {
            f.parse::<f64>().expect("decimal-point floats");
        }
        fields[3].parse::<u64>().expect("integer pair count");
    }
}

#[test]
fn limit_prints_a_summary_and_writes_the_profile() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("profile.csv");
    let out = run(&[
        "limit",
        "--n",
        "513",
        "--q",
        "1",
        "--s",
        "1",
        "--space",
        "l1",
        "--out",
        profile.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("summary JSON");
    assert!(v["sup"].as_f64().unwrap() > 0.0);
    let text = fs::read_to_string(&profile).unwrap();
    assert!(text.starts_with("lambda,value,r_max_cells\n"));
    assert!(text.lines().count() > 40, "one row per λ-grid point");
}

#[test]
fn verify_reports_a_missing_config_by_name() {
    let out = run(&["verify", "--config", "definitely-missing.json"]);
    assert_eq!(out.status.code(), Some(65), "config errors exit 65");
    assert!(
        stderr(&out).contains("definitely-missing.json"),
        "the error names the missing file: {}",
        stderr(&out)
    );
}

#[test]
fn verify_rejects_a_config_violating_a_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    // s = 1 with q(e−1) … the s≠1 value violates the stated smoothness
    // hypothesis of the limit identity.
    fs::write(
        &cfg,
        r#"{"kind":"limit-identity","grids":[129],"q":1.0,"s":0.5}"#,
    )
    .unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
    assert!(
        stderr(&out).contains("s = 1"),
        "the error names the violated hypothesis: {}",
        stderr(&out)
    );
}

#[test]
fn verify_runs_writes_both_report_files_and_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    // The finest rung must clear the top-decade reliability gate, which
    // needs ≥ 1025 nodes at this window.
    fs::write(
        &cfg,
        r#"{
            "kind": "limit-identity",
            "grids": [513, 1025],
            "q": 1.0,
            "s": 1.0,
            "space": {"space": "lebesgue", "p": 1.0},
            "tolerances": {"limit_rel": 0.25},
            "seed": 3
        }"#,
    )
    .unwrap();
    let base = dir.path().join("report");
    let out = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("pass"));

    let json_path = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    assert!(json_path.exists() && csv_path.exists());

    // The emitted JSON re-parses and re-renders the identical CSV table.
    let csv_again = dir.path().join("again.csv");
    let out = run(&[
        "report",
        "--config",
        json_path.to_str().unwrap(),
        "--out",
        csv_again.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        fs::read(&csv_path).unwrap(),
        fs::read(&csv_again).unwrap(),
        "report round-trip must be byte-stable"
    );

    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("grid,lhs,rhs,ratio,rel_err\n"));
    assert!(!csv.contains('\r'), "LF line endings only");
}

#[test]
fn verify_inline_overrides_beat_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    // The config asks for two rungs; --n collapses the ladder to one.
    fs::write(
        &cfg,
        r#"{
            "kind": "limit-identity",
            "grids": [513, 2049],
            "q": 1.0,
            "s": 1.0,
            "tolerances": {"limit_rel": 0.5},
            "seed": 3
        }"#,
    )
    .unwrap();
    let base = dir.path().join("single");
    let out = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "1025",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("single.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "--n collapses the ladder: {csv}");
    assert!(rows[0].starts_with("1025,"));
}

#[test]
fn verify_threads_do_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(
        &cfg,
        r#"{
            "kind": "limit-identity",
            "grids": [1025],
            "q": 1.0,
            "s": 1.0,
            "tolerances": {"limit_rel": 0.5},
            "seed": 3
        }"#,
    )
    .unwrap();
    let csv_for = |threads: &str, base: &Path| {
        let out = run(&[
            "--threads",
            threads,
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            base.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        fs::read(base.with_extension("csv")).unwrap()
    };
    let one = csv_for("1", &dir.path().join("t1"));
    let four = csv_for("4", &dir.path().join("t4"));
    assert_eq!(one, four, "numeric outputs must not depend on thread count");
}
