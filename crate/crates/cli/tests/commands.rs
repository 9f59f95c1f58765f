use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const TRIANGLE: &str = r#"{"points":["a","b","c"],"dist":[["0","1","1"],["1","0","1"],["1","1","0"]]}"#;

#[test]
fn validate_accepts_a_metric_and_rejects_a_broken_one() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", TRIANGLE);
    assert_eq!(forge(&["validate", &ok]).status.code(), Some(0));

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"points":[0,1,2],"dist":[["0","1","5"],["1","0","1"],["5","1","0"]]}"#,
    );
    let out = forge(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "invalid_metric");
}

#[test]
fn missing_file_is_an_io_error() {
    let out = forge(&["validate", "/nonexistent/space.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn extend_reports_the_violated_pair() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.json", TRIANGLE);
    let out = forge(&["extend", &file, "--spec", r#"{"0":"1","1":"3"}"#]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "spec_violation");
    let v = &err["context"]["violations"][0];
    assert_eq!((v["a"].as_u64(), v["b"].as_u64()), (Some(0), Some(1)));
    assert!(err["message"].is_string());
}

#[test]
fn extend_adds_a_point_with_exact_distances() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.json", TRIANGLE);
    let out = forge(&["extend", &file, "--spec", r#"{"0":"1/2","1":"1/2"}"#]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["dist"][3][0], "1/2");
    assert_eq!(doc["dist"][3][1], "1/2");
    assert_eq!(doc["log"].as_array().unwrap().len(), 4);

    let out = forge(&["extend", &file, "--spec", r#"{"0":"1/2"}"#, "--sphere"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["dist"][3][4], "1");
}

#[test]
fn prolong_writes_a_fourteen_value_prefix() {
    let out = forge(&["toeplitz", "prolong", "--f", "3,5", "--h", "3,3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["mode"], "int");
    let values: Vec<&str> = doc["values"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(values.len(), 14);
    assert_eq!(&values[..2], ["3", "5"]);
    assert_eq!(&values[12..], ["3", "3"]);
}

#[test]
fn inadmissible_window_is_a_domain_error() {
    let out = forge(&["toeplitz", "prolong", "--f", "1", "--h", "1,5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prefix_documents_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let p = p.to_str().unwrap();
    let out = forge(&["--out", p, "toeplitz", "prolong", "--f", "2", "--h", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let arg = format!("@{p}");
    let out = forge(&["toeplitz", "validate", "--f", &arg]);
    assert_eq!(stdout_json(&out)["toeplitz"], true);
}

#[test]
fn universal_table_is_csv() {
    let out = forge(&["--format", "csv", "toeplitz", "universal", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "vector,offset");
    assert_eq!(lines.len(), 5);
}

#[test]
fn same_seed_same_bytes() {
    let a = forge(&["--seed", "11", "generic", "--n", "6", "--domain", "rat:2:4"]);
    let b = forge(&["--seed", "11", "generic", "--n", "6", "--domain", "rat:2:4"]);
    assert_eq!(a.stdout, b.stdout);
    let c = forge(&["--seed", "12", "generic", "--n", "6", "--domain", "rat:2:4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn unbounded_certificates_are_json_lines() {
    let out = forge(&["iso", "unbounded", "--stages", "14"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let certs: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(certs.len(), 4);
    for c in &certs {
        assert_eq!(c["kind"], "unbounded");
        assert!(c.get("point").is_some() && c.get("displacement").is_some());
    }
}

#[test]
fn free_pair_certifies_every_word() {
    let out = forge(&["iso", "free", "--words", "a,b,abAB", "--revisits", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let words: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["word"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(words, ["a", "b", "abAB", "a", "b", "abAB"]);

    let out = forge(&["iso", "free", "--words", "aA"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn group2_extend_checks_the_full_matrix() {
    let out = forge(&["group2", "extend", "--delta", "2", "--new", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["level"], 2);
    assert_eq!(doc["space"]["points"][3], "11");

    let out = forge(&["group2", "extend", "--delta", "2", "--new", "1,4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn expo3_reports_the_violation() {
    let out = forge(&["group2", "expo3", "--alpha", "6", "--eps", "1/2"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["violation"], "3/2");
    assert_eq!(doc["contradiction"], true);
}

#[test]
fn orbit_graph_exports_dot_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.json", TRIANGLE);
    let dot = forge(&["--format", "dot", "orbit", "graph", "--space", &file]);
    let text = String::from_utf8(dot.stdout).unwrap();
    assert!(text.starts_with("graph"));
    // d = 1 lies in [0, 1), an N cell
    assert!(!text.contains("--"));
    let csv = forge(&["--format", "csv", "orbit", "graph", "--space", &file]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().trim(), "source,target");
}

#[test]
fn extend_check_finds_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "t.json", TRIANGLE);
    let out = forge(&["orbit", "extend-check", "--space", &file, "--u", "0", "--v", "1,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["witness"], 3);
}

#[test]
fn oracle_suites_pass_and_unknown_suite_fails() {
    for args in [
        &["oracle", "toeplitz", "--n", "4", "--max", "4"][..],
        &["oracle", "metric", "--points", "3", "--max", "3"][..],
        &["oracle", "group2", "--levels", "1", "--max", "3"][..],
    ] {
        let out = forge(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout_json(&out)["counterexamples"].as_array().unwrap().len(), 0);
    }
    assert_eq!(forge(&["oracle", "nope"]).status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(forge(&["generic"]).status.code(), Some(1));
    assert_eq!(forge(&["generic", "--n", "3", "--domain", "real"]).status.code(), Some(1));
    assert_eq!(forge(&["--format", "dot", "generic", "--n", "3"]).status.code(), Some(1));
    assert_eq!(forge(&["--help"]).status.code(), Some(0));
}
