//! Runs the `fraisse` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn fraisse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraisse")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn verdicts_map_to_exit_codes() {
    let pass = fraisse(&["check", "sap", "--class", "builtin graphs", "--base", "2", "--host", "4"]);
    assert_eq!(code(&pass), 0, "{}", stdout(&pass));
    assert!(stdout(&pass).starts_with("verdict: pass"));

    let fail = fraisse(&["check", "jep", "--class", "builtin r0_or_r1_graphs", "--base", "2", "--host", "4"]);
    assert_eq!(code(&fail), 1, "{}", stdout(&fail));
    assert!(stdout(&fail).starts_with("verdict: fail"));

    let slow = fraisse(&[
        "--time-limit",
        "0.05",
        "indivisible",
        "search",
        "--class",
        "builtin graphs",
        "--pattern",
        "graph 4 {0-1 0-2 0-3 1-2 1-3 2-3}",
        "--colors",
        "3",
        "--max-size",
        "12",
    ]);
    assert_eq!(code(&slow), 2, "{}", stdout(&slow));

    let bad = fraisse(&["check", "ap", "--class", "lex(builtin sets"]);
    assert_eq!(code(&bad), 3);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 1"));
    assert_eq!(code(&fraisse(&["check", "nonsense", "--class", "builtin sets"])), 3);
    assert_eq!(code(&fraisse(&["--help"])), 0);
}

#[test]
fn json_output_is_parseable() {
    let o = fraisse(&["--format", "json", "check", "hp", "--class", "builtin tournaments", "--base", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("valid JSON");
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn repro_runs_a_single_case_and_lists_ids() {
    let list = fraisse(&["repro", "--list"]);
    assert_eq!(code(&list), 0);
    assert!(stdout(&list).lines().any(|l| l.split_whitespace().next() == Some("graphs-hereditary")), "{}", stdout(&list));
    let one = fraisse(&["repro", "graphs-hereditary"]);
    assert_eq!(code(&one), 0, "{}", stdout(&one));
    assert!(stdout(&one).ends_with("1 cases: 1 ok, 0 failed, 0 inconclusive\n"));
    assert_eq!(code(&fraisse(&["repro", "no-such-case"])), 3);
}

#[test]
fn cache_directory_is_filled_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = ["--cache-dir", cache, "check", "ap", "--class", "builtin tournaments", "--base", "2", "--host", "4"];
    let first = fraisse(&args);
    assert_eq!(code(&first), 0);
    let records = walk_json(dir.path());
    assert_eq!(records, 1);
    let second = fraisse(&args);
    assert_eq!(stdout(&first), stdout(&second));
    assert!(String::from_utf8_lossy(&second.stderr).contains("1 hits"));
}

fn walk_json(dir: &Path) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| if p.is_dir() { walk_json(&p) } else { usize::from(p.extension().is_some_and(|x| x == "json")) })
        .sum()
}

#[test]
fn built_configurations_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.json");
    let file = file.to_str().unwrap();
    let build = fraisse(&["config", "build", "g-to-t", "--size", "3", "--output", file]);
    assert_eq!(code(&build), 0, "{}", String::from_utf8_lossy(&build.stderr));
    let verify = fraisse(&["config", "verify", file]);
    assert_eq!(code(&verify), 0, "{}", stdout(&verify));
    let inject = fraisse(&["config", "inject", file]);
    assert_eq!(code(&inject), 0, "{}", stdout(&inject));
}

#[test]
fn dot_export_collapses_symmetric_pairs_unless_directed() {
    let s = "digraph 2 {0->1 1->0}";
    let plain = stdout(&fraisse(&["export", "dot", "--structure", s]));
    let directed = stdout(&fraisse(&["export", "dot", "--directed", "--structure", s]));
    assert!(directed.contains("n0 -> n1") && directed.contains("n1 -> n0"), "{directed}");
    assert_ne!(plain, directed);
    assert_eq!(plain, stdout(&fraisse(&["export", "dot", "--structure", s])));
}

#[test]
fn structures_can_come_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.fr");
    std::fs::write(&path, "graph 3 {0-1 1-2}").unwrap();
    let arg = format!("@{}", path.display());
    let o = fraisse(&["export", "dsl", "--structure", &arg]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "structure {E/2} 3 { E(0,1) E(1,0) E(1,2) E(2,1) }");
}
