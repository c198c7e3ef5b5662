use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn flagpde(dir: &Path, args: &[&str], jobs: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagpde"))
        .args(args)
        .current_dir(dir)
        .env("FLAGPDE_JOBS", jobs)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

#[test]
fn harmonic_basis_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = flagpde(dir.path(), &["basis", "harmonic", "--n", "3", "--cap", "2", "--out", "h.json"], "2");
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["outputs"], "h.json");
    assert_eq!(rep["verification"]["passed"], true);
    assert_eq!(rep["inputsDigest"].as_str().unwrap().len(), 64);
    let fam: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("h.json")).unwrap()).unwrap();
    assert_eq!(fam["verified"], true);
    assert_eq!(fam["size"], 18);
}

#[test]
fn tree_with_two_parents_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", r#"{"nodes": 3, "edges": [[1, 2], [1, 3], [2, 3]]}"#);
    let out = flagpde(dir.path(), &["tree", "validate", "--tree", "bad.json"], "1");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/edges/2"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn schema_errors_carry_a_json_pointer() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "chain3.json", r#"{"nodes": 3, "edges": [[1, 2], [2, 3]]}"#);
    write(dir.path(), "data.json", r#"{"halfWidths": [1, "wide", 1], "modes": []}"#);
    let out = flagpde(
        dir.path(),
        &["ivp", "tree-wave", "--tree", "chain3.json", "--data", "data.json", "--t", "0.1", "--grid", "2x2x2"],
        "1",
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/halfWidths/1"));
}

#[test]
fn tree_wave_writes_grid_csv_and_residual() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "chain3.json", r#"{"nodes": 3, "edges": [[1, 2], [2, 3]]}"#);
    write(dir.path(), "onemode.json", r#"{"halfWidths": [1, 1, 1], "modes": [{"k": [1, 1, 1], "cos": 1}]}"#);
    for method in ["splitting", "taylor"] {
        let out = flagpde(
            dir.path(),
            &[
                "ivp", "tree-wave", "--tree", "chain3.json", "--data", "onemode.json", "--t", "0.1", "--grid",
                "3x3x3", "--method", method, "--out", "grid.csv",
            ],
            "2",
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let rep = report(&out);
        let checks = rep["verification"]["checks"].as_array().unwrap();
        let residual = checks.iter().find(|c| c["name"] == "residual").unwrap();
        assert!(residual["value"].as_f64().unwrap().is_finite());
        if method == "taylor" {
            assert!(residual["value"].as_f64().unwrap() < 1e-5);
            assert_eq!(residual["passed"], true);
        }
        let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x1,x2,x3,u");
        assert_eq!(lines.len(), 28);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 4));
    }
}

#[test]
fn lie_commands_report_singular_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = flagpde(dir.path(), &["lie", "sl", "--n", "3", "--l1", "2", "--l2", "1"], "1");
    assert_eq!(out.status.code(), Some(0));
    let v = &report(&out)["verification"];
    assert_eq!(v["annihilated"], true);
    assert_eq!(v["singularWeight"], serde_json::json!(["2", "1"]));
    let out = flagpde(dir.path(), &["lie", "g2", "--k", "2"], "1");
    assert_eq!(report(&out)["verification"]["singularWeight"], serde_json::json!(["2", "0"]));
}

#[test]
fn failed_verification_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = flagpde(
        dir.path(),
        &["solve", "klein-gordon", "--a", "1", "--monomial", "2,1,1", "--max-iterations", "1"],
        "1",
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<(Vec<u8>, String)> = ["1", "4", "4"]
        .iter()
        .map(|jobs| {
            let out = flagpde(dir.path(), &["lie", "g2", "--k", "3", "--out", "g2.json"], jobs);
            assert_eq!(out.status.code(), Some(0));
            (out.stdout, std::fs::read_to_string(dir.path().join("g2.json")).unwrap())
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
    let check: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|jobs| flagpde(dir.path(), &["lie", "check", "--degree", "2", "--seed", "9"], jobs).stdout)
        .collect();
    assert_eq!(check[0], check[1]);
}
