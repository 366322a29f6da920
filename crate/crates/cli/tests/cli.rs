use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kelvinasym")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kelvinasym")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn json_stdout(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

/// Largest `|du − r|` over the rows of a trajectory CSV.
fn max_du_gap(p: &Path) -> f64 {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,u,du,conservation_residual"));
    lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            (f[2] - f[0]).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn lemmas_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["lemmas", "--n", "4", "--trials", "50", "--seed", "7", "--out", "report.json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_file(&dir.path().join("report.json"));
    assert_eq!(r["all_pass"], Value::Bool(true));
    assert!(r["first_failure"].is_null());
    for lemma in ["L31", "L32", "L33", "L34"] {
        assert!(r["lemmas"][lemma]["checks"].as_u64().unwrap() > 0, "{lemma}");
    }
}

#[test]
fn lemmas_in_two_dimensions_skip_three_dimensional_identities() {
    let r = json_stdout(&run(&["lemmas", "--n", "2", "--trials", "5"]));
    assert_eq!(r["all_pass"], Value::Bool(true));
    assert!(r["lemmas"]["L32"].is_null());
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["lemmas", "--n", "1"],
        vec!["lemmas"],
        vec!["no-such-command"],
        vec!["poisson", "--n", "2"],
        vec!["radial", "--branch", "cubic", "--n", "3", "--u1", "0", "--p1", "1"],
        vec!["radial", "--branch", "log", "--n", "3", "--u1", "0", "--p1", "1"],
        vec!["kelvin-check", "--lambda", "1,2", "--n", "3"],
        vec!["fit", "--samples", "/nonexistent/samples.csv"],
        vec!["lemmas", "--n", "3", "--out", "/nonexistent/dir/report.json"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn radial_exact_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let exact = format!("{}", 0.75 * std::f64::consts::PI);
    let args = ["radial", "--branch", "slag", "--n", "3", "--u1", "0.5", "--p1", "1.0", "--rmax", "50", "--step", "1e-3"];
    let o = run_in(dir.path(), &[&args[..], &["--theta", &exact, "--out", "traj.csv"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(max_du_gap(&dir.path().join("traj.csv")) < 1e-9);

    // Rounding the phase to 8 decimals shifts it by δ ≈ 1.9e-10, and the
    // exact solution then drifts as du − r ≈ −2δr/3, about 6.4e-9 at r = 50.
    let o = run_in(dir.path(), &[&args[..], &["--theta", "2.35619449", "--out", "rounded.csv"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let delta = 0.75 * std::f64::consts::PI - 2.35619449;
    let gap = max_du_gap(&dir.path().join("rounded.csv"));
    assert!((gap - 2.0 * delta * 50.0 / 3.0).abs() < 1e-9, "gap {gap}");
}

#[test]
fn radial_stride_keeps_last_node() {
    let o = run(&[
        "radial", "--n", "3", "--theta", "2.356194490192345", "--u1", "0.5", "--p1", "1", "--rmax", "2", "--step",
        "0.1", "--stride", "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.last().unwrap().starts_with("2,"));
}

#[test]
fn radial_domain_failure_exits_with_one_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["radial", "--branch", "recip", "--n", "3", "--theta", "1", "--u1", "0", "--p1", "1", "--out", "t.csv"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r ="));
    assert!(dir.path().join("t.csv").exists());
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["lemmas", "--n", "3", "--trials", "20", "--seed", "11"],
        vec!["kelvin-check", "--lambda", "0.4,0.9,1.5", "--samples", "10", "--seed", "3"],
        vec!["expand3", "--order", "4", "--seed", "5"],
    ] {
        let a = run(&args);
        let b = Command::new(env!("CARGO_BIN_EXE_kelvinasym"))
            .args(&args)
            .env("KELVINASYM_THREADS", "1")
            .output()
            .unwrap();
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_kelvinasym"))
        .args(["lemmas", "--n", "3", "--trials", "1"])
        .env("KELVINASYM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_fills_missing_flags_and_explicit_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 3, "trials": 4, "seed": 9}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let r = json_stdout(&run(&["lemmas", "--config", cfg]));
    assert_eq!((r["n"].as_u64(), r["trials"].as_u64(), r["seed"].as_u64()), (Some(3), Some(4), Some(9)));
    let r = json_stdout(&run(&["lemmas", "--config", cfg, "--trials", "2"]));
    assert_eq!(r["trials"].as_u64(), Some(2));

    std::fs::write(dir.path().join("bad.json"), r#"{"bogus": 1}"#).unwrap();
    let o = run(&["lemmas", "--n", "3", "--config", dir.path().join("bad.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_arrays_become_lists() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"lambda": ["1/2", "1/3", "-1"], "order": 3}"#).unwrap();
    let r = json_stdout(&run(&["expand3", "--config", cfg.to_str().unwrap()]));
    assert_eq!(r["spectrum"]["lambda"], serde_json::json!(["1/2", "1/3", "-1"]));
    assert_eq!(r["audit_pass"], Value::Bool(true));
}

#[test]
fn poisson_solves_constant_source() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    std::fs::write(&h, r#"{"n_vars": 3, "terms": [{"coef": "1", "exp": [0, 0, 0]}]}"#).unwrap();
    let r = json_stdout(&run(&["poisson", "--n", "3", "--h", h.to_str().unwrap()]));
    assert_eq!(r["u"]["terms"][0]["coef"], Value::String("1/2".into()));

    let r = json_stdout(&run(&["poisson", "--n", "5", "--degree", "4", "--seed", "1"]));
    assert_eq!(r["residual_zero"], Value::Bool(true));

    let o = run(&["poisson", "--n", "4", "--h", h.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn residual_n3_of_constant_profile() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    std::fs::write(&p, r#"{"n_vars": 3, "terms": [{"coef": "1", "exp": [0, 0, 0]}]}"#).unwrap();
    let r = json_stdout(&run(&["residual-n3", "--lambda", "0,0,0", "--p", p.to_str().unwrap()]));
    // Only the cubic term survives: the residual is −2|y|⁴.
    assert_eq!(r["min_exponent"].as_i64(), Some(4));
    assert_eq!(
        r["residual"]["slots"],
        serde_json::json!([{"k": 4, "poly": {"n_vars": 3, "terms": [{"coef": "-2", "exp": [0, 0, 0]}]}}])
    );
}

#[test]
fn expand3_first_correction_and_audit() {
    let r = json_stdout(&run(&["expand3", "--lambda", "1/2,1/3,-1", "--order", "5", "--seed", "4"]));
    assert_eq!(r["first_matches_leading"], Value::Bool(true));
    assert_eq!(r["audit_pass"], Value::Bool(true));
    assert_eq!(r["steps"].as_array().unwrap().len(), 3);
    let o = run(&["expand3", "--order", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kelvin_check_all_branches() {
    for branch in [
        vec!["--branch", "slag", "--theta", "0.3"],
        vec!["--branch", "recip"],
        vec!["--branch", "atan2", "--a", "0.6"],
        vec!["--branch", "log", "--a", "1.25"],
    ] {
        let args = [&["kelvin-check", "--lambda", "0.4,0.9,1.5", "--samples", "20"][..], &branch[..]].concat();
        let r = json_stdout(&run(&args));
        assert_eq!(r["pass"], Value::Bool(true), "{branch:?}");
    }
    let o = run(&["kelvin-check", "--branch", "atan2", "--a", "1.25", "--lambda", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kelvin_check_reports_tolerance_violation() {
    let o = run(&["kelvin-check", "--lambda", "0.4,0.9,1.5", "--samples", "5", "--tol", "1e-14"]);
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["pass"], Value::Bool(false));
}

#[test]
fn residual_scaling_slope() {
    for n in ["3", "4"] {
        let lambda = if n == "3" { "0.4,0.9,1.5" } else { "0.4,0.9,1.5,-0.7" };
        let r = json_stdout(&run(&["residual-scaling", "--n", n, "--lambda", lambda, "--seed", "2"]));
        let want: f64 = n.parse::<f64>().unwrap() - 2.0;
        assert!(r["slope"].as_f64().unwrap() >= want - 0.1, "n = {n}: {r}");
    }
}

#[test]
fn radial_samples_feed_fit() {
    let dir = tempfile::tempdir().unwrap();
    let theta = format!("{}", std::f64::consts::FRAC_PI_2);
    let o = run_in(
        dir.path(),
        &[
            "radial", "--n", "2", "--theta", &theta, "--u1", "0.5", "--p1", "1", "--rmax", "60", "--step", "1e-2",
            "--out", "t.csv", "--field-samples", "s.csv", "--center", "0.7,-0.4", "--seed", "3",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = run_in(dir.path(), &["fit", "--samples", "s.csv", "--theta", &theta, "--out", "fit.json"]);
    assert_eq!(fit.status.code(), Some(0), "{}", String::from_utf8_lossy(&fit.stderr));
    let r = json_file(&dir.path().join("fit.json"));
    let a = &r["A"];
    for (i, j, want) in [(0, 0, 1.0), (0, 1, 0.0), (1, 1, 1.0)] {
        assert!((a[i][j].as_f64().unwrap() - want).abs() < 1e-6);
    }
    assert!((r["b"][0].as_f64().unwrap() + 0.7).abs() < 1e-6);
    assert!((r["b"][1].as_f64().unwrap() - 0.4).abs() < 1e-6);
}
