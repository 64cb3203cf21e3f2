//! Runs the `kcut` binary and checks output, JSON schema and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn kcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcut")).args(args).output().expect("binary runs")
}

fn json_value(args: &[&str]) -> Value {
    let out = kcut(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kcut-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn pentagon_with_triangles() {
    let v = json_value(&["bound", "--family", "cycle", "5", "--k", "2", "--method", "sdp+triangles", "--json"]);
    assert!((v["value"].as_f64().unwrap() - 25.0 / 6.0).abs() < 1e-5);
    assert_eq!(v["status"], "optimal");
    for key in ["graph", "k", "method", "value", "residuals", "runtime_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["residuals"]["equality"].as_f64().unwrap() < 1e-6);
}

#[test]
fn coxeter_eigenvalue_bound_text() {
    let out = kcut(&["bound", "--family", "coxeter", "--k", "2", "--method", "eig"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("value:   37.8995"), "{text}");
}

#[test]
fn chromatic_of_complete_minus_edge() {
    let v = json_value(&["bound", "--family", "complete", "100", "--minus-edge", "--method", "chromatic", "--json"]);
    assert_eq!(v["report"]["integer_value"], 99);
    assert_eq!(v["k"], Value::Null);
    let v = json_value(&["bound", "--family", "complete", "100", "--minus-edge", "--method", "hoffman", "--json"]);
    assert_eq!(v["report"]["integer_value"], 51);
}

#[test]
fn srg_method_needs_strong_regularity() {
    let v = json_value(&["bound", "--family", "petersen", "--k", "3", "--method", "srg", "--json"]);
    assert_eq!(v["value"], 15.0);
    assert_eq!(v["report"]["metadata"]["active_term"], "edges");
    assert_eq!(kcut(&["bound", "--family", "cycle", "7", "--k", "2", "--method", "srg"]).status.code(), Some(2));
}

#[test]
fn exact_values() {
    assert_eq!(json_value(&["exact", "--family", "complete", "12", "--k", "8", "--json"])["value"], 62.0);
    assert_eq!(json_value(&["exact", "--family", "petersen", "--k", "2", "--json"])["value"], 12.0);
    let v = json_value(&["exact", "--family", "cycle", "5", "--k", "2", "--json"]);
    assert_eq!(v["value"], 4.0);
    assert_eq!(v["partition"].as_array().unwrap().len(), 5);
}

#[test]
fn graph_files_are_read() {
    let path = scratch("square.txt");
    std::fs::write(&path, "4 4\n0 1\n1 2\n2 3\n0 3\n").unwrap();
    let v = json_value(&["exact", path.to_str().unwrap(), "--k", "2", "--json"]);
    assert_eq!(v["value"], 4.0);
    let dimacs = scratch("square.dimacs");
    std::fs::write(&dimacs, "c square\np edge 4 4\ne 1 2\ne 2 3\ne 3 4\ne 1 4\n").unwrap();
    let v =
        json_value(&["bound", dimacs.to_str().unwrap(), "--format", "dimacs", "--k", "2", "--method", "eig", "--json"]);
    assert!((v["value"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let bad = scratch("bad.txt");
    std::fs::write(&bad, "3 1\n0 7\n").unwrap();
    assert_eq!(kcut(&["exact", bad.to_str().unwrap(), "--k", "2"]).status.code(), Some(2));
    assert_eq!(kcut(&["bound", "--family", "nope", "--k", "2", "--method", "eig"]).status.code(), Some(2));
    assert_eq!(kcut(&["exact", "--family", "cycle", "40", "--k", "3"]).status.code(), Some(4));
    let config = scratch("slow.toml");
    std::fs::write(&config, "max_iter = 20\ncheck_every = 10\n").unwrap();
    let args = ["--config", config.to_str().unwrap(), "bound", "--family", "petersen", "--k", "3", "--method", "sdp"];
    assert_eq!(kcut(&args).status.code(), Some(3));
}

#[test]
fn config_rejects_unknown_keys() {
    let config = scratch("typo.toml");
    std::fs::write(&config, "tol_eqq = 1e-9\n").unwrap();
    let out =
        kcut(&["--config", config.to_str().unwrap(), "bound", "--family", "cycle", "5", "--k", "2", "--method", "eig"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn conjecture_grid_and_csv() {
    let out = kcut(&["conjecture", "--dmax", "1", "--qmax", "2"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "PASS d≤1 q≤2");
    let csv = scratch("grid.csv");
    let out = kcut(&["conjecture", "--dmax", "5", "--qmax", "3", "--out", csv.to_str().unwrap()]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "PASS d≤5 q≤3");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,q,j,K_j(1),min_i K_j(i),argmin i,pass"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.contains(&"2,3,2,-2,-2,1,true"));
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn reproduce_single_criterion() {
    let out = kcut(&["reproduce", "--only", "kneser"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("criterion  3 kneser"));
    assert!(text.contains("1/1 criteria pass"));
    assert_eq!(kcut(&["reproduce", "--only", "nothing"]).status.code(), Some(2));
}
