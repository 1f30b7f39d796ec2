use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_finpoisson"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("finpoisson-cli-{}-{name}", std::process::id()))
}

#[test]
fn ode_csv_has_contract_header_and_round_trip_floats() {
    let o = run(&["ode", "--n", "3", "--mu", "0.1", "--c", "-1", "--rho", "1", "--grid", "4096", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,f,fprime,residual"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4096);
    assert!((rows.last().unwrap()[0] - 1.0).abs() < 1e-12);
    assert!(rows.iter().all(|r| r[3] <= 1e-6));
    let mantissa =
        text.lines().nth(1).unwrap().split(',').next().unwrap().split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        vec!["ode", "--n", "4", "--mu", "0.5", "--rho", "2", "--format", "csv"],
        vec!["verify", "--suite", "metric", "--seed", "42", "--samples", "50"],
        vec!["pde", "--b", "0.3", "--N", "65", "--format", "json"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_controls_the_sampled_checks() {
    let a = run(&["verify", "--suite", "metric", "--seed", "1", "--samples", "20"]);
    let b = run(&["verify", "--suite", "metric", "--seed", "2", "--samples", "20"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn thread_cap_does_not_change_the_report() {
    let args = ["verify", "--suite", "all", "--samples", "20", "--format", "csv"];
    let one = run_env(&args, &[("FINPOISSON_THREADS", "1")]);
    let four = run_env(&args, &[("FINPOISSON_THREADS", "4")]);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.status.code(), four.status.code());
    let bad = run_env(&args, &[("FINPOISSON_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn poincare_report_carries_the_disc_integral() {
    let o = run(&["verify", "--suite", "poincare"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "1");
    let checks = v["checks"].as_array().unwrap();
    let i_plus = checks.iter().find(|c| c["id"] == "poincare.I_plus").unwrap();
    assert!((i_plus["expected"].as_f64().unwrap() - std::f64::consts::PI / 30.0).abs() < 1e-15);
    assert_eq!(i_plus["pass"], true);
    // exit status mirrors the aggregate verdict
    let failed = v["failed"].as_array().unwrap();
    assert_eq!(o.status.code(), Some(if failed.is_empty() { 0 } else { 1 }));
    for id in failed {
        assert!(stderr(&o).contains(id.as_str().unwrap()));
    }
}

#[test]
fn tightened_tolerances_report_offending_ids() {
    let ok = run(&["verify", "--suite", "hardy"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let tight = run(&["verify", "--suite", "hardy", "--tol-scale", "1e-3"]);
    assert_eq!(tight.status.code(), Some(1));
    assert!(stderr(&tight).contains("FAIL hardy.n3.intercept"));
}

#[test]
fn bessel_study_reports_discrepancies_with_the_solver_as_oracle() {
    let o = run(&["verify", "--suite", "bessel"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let convergence =
        v["checks"].as_array().unwrap().iter().filter(|c| c["id"].as_str().unwrap().ends_with(".convergence"));
    assert!(convergence.into_iter().all(|c| c["pass"] == true));
    for d in v["discrepancies"].as_array().unwrap() {
        assert!(!d["oracle"].as_str().unwrap().is_empty());
        assert!(stderr(&o).contains(d["id"].as_str().unwrap()));
    }
}

#[test]
fn pde_csv_has_bound_columns_and_a_summary() {
    let out = temp_path("pde.csv");
    let o = run(&[
        "pde",
        "--ball",
        "backward",
        "--b",
        "0.3",
        "--rho",
        "1",
        "--N",
        "65",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("i,j,x,y,u,lower_bound,upper_bound\n"));
    let summary_path = format!("{}.summary.json", out.display());
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert_eq!(summary["schema"], "1");
    assert_eq!(summary["params"]["ball"], "backward");
    assert_eq!(summary["nodes"].as_u64().unwrap() as usize, csv.lines().count() - 1);
    assert!(summary["sandwich"]["lower_slack"].as_f64().unwrap() >= -1e-3);
    let _ = std::fs::remove_file(out);
    let _ = std::fs::remove_file(summary_path);
}

#[test]
fn metric_values() {
    let o = run(&["metric", "--b", "0.5", "--y", "-1,0", "--alpha", "1,0"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["F"].as_f64().unwrap(), 0.5);
    assert_eq!(v["F_reverse"].as_f64().unwrap(), 1.5);
    assert!((v["reversibility"].as_f64().unwrap() - 3.0).abs() < 1e-15);

    let structure = temp_path("structure.json");
    std::fs::write(&structure, r#"{"dim": 2, "kind": "poincare_disc"}"#).unwrap();
    let o = run(&["metric", "--structure", structure.to_str().unwrap(), "--x", "1,0", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("\nreversibility,9.0000000000000"));
    let _ = std::fs::remove_file(structure);
}

#[test]
fn config_overrides_flags() {
    let cfg = temp_path("config.json");
    std::fs::write(&cfg, r#"{"mu": 0.2, "grid": 128, "format": "csv"}"#).unwrap();
    let o = run(&["ode", "--n", "3", "--mu", "0.1", "--config", cfg.to_str().unwrap()]);
    let with_flags = run(&["ode", "--n", "3", "--mu", "0.2", "--grid", "128", "--format", "csv"]);
    assert_eq!(o.stdout, with_flags.stdout);

    std::fs::write(&cfg, r#"{"mu": 0.2, "suite": "hardy"}"#).unwrap();
    let bad = run(&["ode", "--n", "3", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("unknown field `suite`"));
    let _ = std::fs::remove_file(cfg);
}

#[test]
fn exit_codes_distinguish_input_and_numerical_failures() {
    assert_eq!(run(&["ode", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["ode", "--n", "3", "--mu", "0.3"]).status.code(), Some(2));
    assert_eq!(run(&["pde", "--N", "64"]).status.code(), Some(2));
    assert_eq!(run(&["pde", "--ball", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["ode", "--n", "3", "--tol", "1e-300", "--grid", "64"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn poincare_table_matches_closed_forms() {
    let o = run(&["poincare", "--points", "9", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let (a, b) = (row["dual_minus"].as_f64().unwrap(), row["dual_minus_closed"].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-12 * b);
    }
    assert!((v["total_volume"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-9);
}
