mod common;

use std::path::PathBuf;
use std::process::Command;

use cegd::cli::run;
use cegd::model_io::parse_solve_report;
use common::data_path;

fn cegd(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cegd").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn data(name: &str) -> String {
    data_path(name).to_str().unwrap().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_agrees_with_oracle() {
    let (code, out, _) = cegd(&["solve", &data("paper_example.ceg")]);
    assert_eq!(code, 0);
    let report = parse_solve_report(&out).unwrap();
    let (_, oracle, _) = cegd(&["oracle", &data("paper_example.ceg")]);
    let rollback: f64 = oracle.trim().strip_prefix("rollback=").unwrap().parse().unwrap();
    assert!((report.value - rollback).abs() <= 1e-9);
    assert_eq!(report.decisions[0], ("d1".to_string(), "1".to_string()));
}

#[test]
fn flavour_flags() {
    let file = data("simple_decision.ceg");
    let (c1, t1, _) = cegd(&["solve", &file, "--type1"]);
    let (c2, t2, _) = cegd(&["solve", &file, "--type2"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(t1, t2);
    let (code, _, err) = cegd(&["solve", &file, "--type1", "--type2"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot be used with"));
    let (code, _, err) = cegd(&["solve", &data("type1_chain.ceg"), "--type2"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
}

#[test]
fn decision_relevance() {
    let (code, out, _) = cegd(&["ci", &data("paper_example.ceg"), "--decision", "D2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "irrelevant: C1\n");
}

#[test]
fn ci_queries() {
    let file = data("paper_example.ceg");
    let (_, out, _) = cegd(&["ci", &file, "--position", "c3_1_1_1_1"]);
    assert_eq!(out, "(C3, U) ⊥ (C1, D2) | (D1=1, C2=1)\n");
    let (_, out, _) = cegd(&[
        "ci",
        &file,
        "--cut",
        "c3_1_1_1_1,c3_2_1_1_1,c3_1_2_1_1,c3_1_2_1_2,c3_2_2_1_1,c3_2_2_1_2",
    ]);
    assert_eq!(out, "U ⊥ C1 | (D1, C2, D2)\n");
    let (code, _, err) = cegd(&["ci", &file, "--cut", "d1,c2_1"]);
    assert_eq!(code, 1);
    assert!(err.contains("cut"));
    let (code, _, _) = cegd(&["ci", &file]);
    assert_eq!(code, 2);
    let (code, _, _) = cegd(&["ci", &file, "--position", "d1", "--decision", "D2"]);
    assert_eq!(code, 2);
}

#[test]
fn validation_failure_names_the_line() {
    let (code, out, err) = cegd(&["validate", &data("bad_probs.ceg")]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert_eq!(err, "error: line 5: probabilities out of `r` sum to 0.9\n");
    let (code, out, _) = cegd(&["validate", &data("paper_example.ceg")]);
    assert_eq!(code, 0);
    assert_eq!(out, "ok: 49 nodes, 48 edges, 9 stages\n");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cegd(&[]).0, 2);
    assert_eq!(cegd(&["frobnicate"]).0, 2);
    assert_eq!(cegd(&["manipulate", &data("paper_example.ceg"), "--at", "d1"]).0, 2);
    let (code, out, _) = cegd(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("parsimonize"));
}

#[test]
fn missing_file_exits_1() {
    let (code, _, err) = cegd(&["validate", "/nonexistent/model.ceg"]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot read"));
}

#[test]
fn parsimonize_and_export() {
    let file = data("paper_example.ceg");
    let dot = scratch("parsimonious.dot");
    let (code, out, _) = cegd(&["parsimonize", &file, "--out", dot.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out, std::fs::read_to_string(data_path("paper_example.parsimonious.txt")).unwrap());
    let text = std::fs::read_to_string(&dot).unwrap();
    assert_eq!(text.matches("shape=diamond").count(), 5);

    let tree_dot = scratch("tree.dot");
    let (code, _, _) = cegd(&["export-dot", &file, "--tree", "--out", tree_dot.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&tree_dot).unwrap();
    assert_eq!(text.matches("shape=diamond").count(), 24);
    assert_eq!(
        cegd(&["export-dot", &file, "--tree", "--ceg", "--out", "x.dot"]).0,
        2
    );
}

#[test]
fn manipulate_prints_graph_or_report() {
    let file = data("paper_example.ceg");
    let (code, out, _) = cegd(&["manipulate", &file, "--at", "d1", "--choose", "2", "--solve"]);
    assert_eq!(code, 0);
    assert_eq!(parse_solve_report(&out).unwrap().value, 4.0);
    let (_, out, _) = cegd(&["manipulate", &file, "--at", "d1", "--choose", "2"]);
    assert!(out.starts_with("ceg type2 root=d1"));
    assert!(!out.contains("c2_1"));
    let (code, _, err) = cegd(&["manipulate", &file, "--at", "d1", "--choose", "9"]);
    assert_eq!(code, 1);
    assert!(err.contains("no outgoing edge labelled `9`"));
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_cegd"))
        .args(["solve", &data("simple_decision.ceg")])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "max_expected_utility=10\ndecide choose -> a\n");
    let out = Command::new(env!("CARGO_BIN_EXE_cegd"))
        .args(["validate", &data("bad_probs.ceg")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
