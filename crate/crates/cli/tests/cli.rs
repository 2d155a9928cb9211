use std::process::{Command, Output};

use serde_json::Value;

fn gaussn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussn"))
        .args(args)
        .env_remove("GAUSSN_QUAD_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = gaussn(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).expect("valid JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn fisher_reports_both_forms() {
    for (args, want) in [
        (vec!["fisher", "--model", "trig"], 4.0),
        (vec!["fisher", "--model", "chi2log"], 1.0),
        (vec!["fisher", "--model", "gauss", "--sigma", "2"], 0.25),
        (vec!["fisher", "--model", "binom", "--xi", "0.4"], 4.0),
    ] {
        let v = json(&args);
        assert_eq!(v["command"], "fisher");
        let r = &v["results"];
        assert!((f(&r["gradient_form"]) - want).abs() < 1e-6, "{args:?}");
        assert!((f(&r["curvature_form"]) - want).abs() < 1e-5, "{args:?}");
        assert!((f(&r["prior_measure"]) - want.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn criterion_minimal_n() {
    let n = |args: &[&str]| json(args)["results"]["minimal_n"].as_u64().unwrap();
    assert_eq!(n(&["criterion", "--model", "chi2log"]), 160);
    assert_eq!(n(&["criterion", "--model", "trig"]), 8);
    assert_eq!(
        n(&["criterion", "--model", "chi2log", "--mode", "strict"]),
        161
    );
}

#[test]
fn table_csv_rows() {
    assert_eq!(
        stdout(&["table", "--model", "chi2log", "--n", "3,10,100"])
            .lines()
            .map(|l| l.rsplit(',').next().unwrap())
            .collect::<Vec<_>>(),
        ["ratio_3dp", "3.263", "0.817", "0.135"]
    );
    let trig = stdout(&["table", "--model", "trig", "--n", "8"]);
    assert!(trig.ends_with(",0.094\n"), "{trig}");
    let gauss = stdout(&["table", "--model", "gauss", "--n", "1"]);
    assert!(gauss.ends_with(",0.000\n"), "{gauss}");
}

#[test]
fn table_json_mirrors_csv() {
    let v = json(&[
        "table", "--model", "chi2log", "--n", "160", "--format", "json",
    ]);
    let row = &v["results"]["rows"][0];
    assert_eq!(row["n"], 160);
    assert!((f(&row["ratio_raw"]) - 0.100_217).abs() < 1e-6);
    assert_eq!(f(&row["ratio_3dp"]), 0.1);
}

#[test]
fn posterior_reports() {
    let g = json(&[
        "posterior",
        "--model",
        "gauss",
        "--xi-true",
        "0",
        "--n",
        "25",
        "--seed",
        "7",
    ]);
    assert!(f(&g["results"]["comparison"]["sup_log_deviation"]) <= 1e-10);

    let c = json(&[
        "posterior",
        "--model",
        "chi2log",
        "--xi-true",
        "0",
        "--n",
        "160",
        "--seed",
        "7",
    ]);
    assert_eq!(c["results"]["passes"], true);
    assert_eq!(c["results"]["criterion"]["n"], 160);

    let out = gaussn(&[
        "posterior",
        "--model",
        "trig",
        "--xi-true",
        "0.2",
        "--n",
        "8",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
}

#[test]
fn posterior_grid_csv() {
    let text = stdout(&[
        "posterior",
        "--model",
        "chi2log",
        "--xi-true",
        "0",
        "--n",
        "40",
        "--seed",
        "3",
        "--format",
        "csv",
        "--grid-size",
        "301",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "xi,density,gaussian_density");
    assert_eq!(lines.len(), 302);
    assert!(!text.contains('\r'));
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        vec![
            "posterior",
            "--model",
            "trig",
            "--xi-true",
            "0.2",
            "--n",
            "8",
            "--seed",
            "7",
        ],
        vec![
            "posterior",
            "--model",
            "chi2log",
            "--xi-true",
            "1",
            "--n",
            "50",
            "--seed",
            "2",
            "--format",
            "csv",
        ],
        vec!["fisher", "--model", "binom"],
        vec!["table", "--model", "chi2log", "--n", "3,160"],
    ] {
        assert_eq!(gaussn(&args).stdout, gaussn(&args).stdout, "{args:?}");
    }
}

#[test]
fn verify_suites() {
    let out = gaussn(&["verify", "--suite", "table1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("table1: 14/14"));

    let v: Value =
        serde_json::from_slice(&gaussn(&["verify", "--suite", "fisher"]).stdout).unwrap();
    let forms = v["results"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().ends_with(" form"))
        .count();
    assert_eq!(forms, 8);

    assert!(gaussn(&["verify"]).status.success());
}

#[test]
fn exit_codes() {
    assert_eq!(
        gaussn(&["fisher", "--model", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        gaussn(&["criterion", "--model", "trig", "--threshold", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gaussn(&["table", "--model", "trig", "--n", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gaussn(&["fisher", "--model", "trig", "--xi", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gaussn(&["verify", "--suite", "bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(
        gaussn(&["fisher", "--model", "trig", "--quad-tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    // No N below 2^62 reaches this threshold.
    assert_eq!(
        gaussn(&[
            "criterion",
            "--model",
            "chi2log",
            "--threshold",
            "1e-300",
            "--mode",
            "strict"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn quad_tol_flag_and_env_are_recorded() {
    let v = json(&["fisher", "--model", "chi2log", "--quad-tol", "1e-9"]);
    assert_eq!(f(&v["parameters"]["quad_tol"]), 1e-9);
    let out = Command::new(env!("CARGO_BIN_EXE_gaussn"))
        .args([
            "table", "--model", "chi2log", "--n", "10", "--format", "json",
        ])
        .env("GAUSSN_QUAD_TOL", "1e-8")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(f(&v["parameters"]["quad_tol"]), 1e-8);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("gaussn-out-{}.csv", std::process::id()));
    let out = gaussn(&[
        "table",
        "--model",
        "trig",
        "--n",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(
        text,
        "N,ratio_raw,ratio_3dp\n8,9.3750000000000000e-2,0.094\n"
    );
}
