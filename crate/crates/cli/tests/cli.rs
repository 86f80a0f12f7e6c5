use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn hlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlab"))
        .args(args)
        .env_remove("HLAB_OUT_DIR")
        .output()
        .expect("hlab runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn check<'a>(r: &'a Value, id: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == id)
        .unwrap_or_else(|| panic!("no check {id}"))
}

#[test]
fn group_axioms_pass() {
    let out = hlab(&["verify-group", "--n", "2", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["seed"], 7);
    assert_eq!(r["summary"]["failed"], 0);
    for id in [
        "group-associativity[n=2]",
        "group-identity[n=2]",
        "group-inverse[n=2]",
    ] {
        assert_eq!(check(&r, id)["value"], 0.0);
    }
}

#[test]
fn identity_on_default_grid() {
    let out = hlab(&[
        "verify-identity",
        "--n",
        "1",
        "--grid",
        "default",
        "--seed",
        "7",
        "--samples",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let c = check(&r, "divergence-identity[n=1]");
    assert!(c["value"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["config"]["samples"], 100);
}

#[test]
fn non_solution_is_rejected_by_the_gate() {
    let out = hlab(&["verify-identity", "--expr", "pow(add(mul(z1,zb1),1),-1)"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let c = check(&r, "pde-gate[n=1,expr=user]");
    assert_eq!(c["pass"], false);
    assert!(c["note"].as_str().unwrap().contains("not a solution"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL pde-gate"));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_toml = dir.path().join("bad.toml");
    fs::write(&bad_toml, "[[member]]\nn = 1\nlambda = 3\n").unwrap();
    let bad_toml = bad_toml.to_str().unwrap();
    let cases: &[&[&str]] = &[
        &["verify-group", "--n", "0"],
        &["verify-group", "--tol", "no-equals"],
        &["verify-group", "--tol", "left-invariance=-1"],
        &["verify-group", "--samples", "0"],
        &["verify-bubble", "--lambda", "0.1i", "--mu", "2"],
        &["verify-bubble", "--n", "2", "--lambda", "i", "--mu", "0.1"],
        &["verify-bubble", "--grid", "/nonexistent/grid.toml"],
        &["verify-bubble", "--grid", bad_toml],
        &["verify-identity", "--expr", "z1 +* 2"],
        &["verify-nothing"],
        &[
            "emit-series",
            "--report",
            "/nonexistent/report.json",
            "--series",
            "x",
        ],
    ];
    for args in cases {
        let out = hlab(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn reports_are_byte_identical() {
    let args = [
        "verify-bubble",
        "--n",
        "1",
        "--samples",
        "10",
        "--grid-size",
        "3",
        "--seed",
        "11",
    ];
    let a = hlab(&args);
    let b = hlab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = hlab(&[
        "verify-bubble",
        "--n",
        "1",
        "--samples",
        "10",
        "--grid-size",
        "3",
        "--seed",
        "12",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn output_directory_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_hlab"))
        .args([
            "verify-euclidean",
            "--n",
            "3",
            "--samples",
            "5",
            "--format",
            "csv",
        ])
        .env("HLAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let csv = fs::read_to_string(dir.path().join("verify-euclidean.csv")).unwrap();
    assert!(csv.starts_with("id,value,tolerance,rule,pass,inputs_digest\n"));

    let explicit = dir.path().join("nested").join("r.json");
    let out = hlab(&[
        "verify-euclidean",
        "--n",
        "3",
        "--samples",
        "5",
        "--out",
        explicit.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&fs::read_to_string(&explicit).unwrap()).unwrap();
    assert_eq!(r["suite"], "verify-euclidean");
}

#[test]
fn gradient_series_has_one_row_per_radius() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("appendix.json");
    let out = hlab(&[
        "verify-appendix",
        "--n",
        "1",
        "--lambda",
        "i",
        "--samples",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let series = hlab(&[
        "emit-series",
        "--report",
        path.to_str().unwrap(),
        "--series",
        "gradient-estimate-n1",
    ]);
    assert_eq!(series.status.code(), Some(0));
    let text = String::from_utf8(series.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(
        rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        vec![10.0, 100.0, 1000.0]
    );
    assert!(rows.iter().all(|r| r[1] > 0.0 && r[1].is_finite()));

    let missing = hlab(&[
        "emit-series",
        "--report",
        path.to_str().unwrap(),
        "--series",
        "nope",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("unknown series"));
}

#[test]
fn grid_file_members_are_used_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.toml");
    fs::write(
        &grid,
        "seed = 5\nsamples = 8\n\n[[member]]\nn = 1\nlambda = \"0.3+1.2i\"\nmu = [\"0.1-0.2i\"]\n",
    )
    .unwrap();
    let out = hlab(&[
        "verify-bubble",
        "--n",
        "1",
        "--grid",
        grid.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert_eq!(r["config"]["seed"], 5);
    assert_eq!(r["config"]["samples"], 8);
    assert_eq!(r["config"]["grid"]["kind"], "members");
    assert_eq!(r["config"]["grid"]["members"].as_array().unwrap().len(), 1);
}

#[test]
fn tolerance_override_is_echoed() {
    let out = hlab(&[
        "verify-group",
        "--n",
        "1",
        "--samples",
        "50",
        "--seed",
        "9",
        "--tol",
        "volume-slope=0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["tolerances"]["volume-slope"], 0.1);
    assert_eq!(check(&r, "volume-slope[n=1]")["tolerance"], 0.1);
}
