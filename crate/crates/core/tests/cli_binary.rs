use std::process::{Command, Output};

fn hydra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydra"))
        .args(args)
        .env_remove("HYDRA_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn height_examples() {
    assert_eq!(stdout(&hydra(&["height", "0"])), "Exact 0\n");
    assert_eq!(stdout(&hydra(&["height", "1+1"])), "Exact 2\n");
}

#[test]
fn one_has_a_single_move() {
    let o = hydra(&["moves", "1", "--level", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0: Necrosis -> 0\n");
}

#[test]
fn json_moves_are_documents() {
    let o = hydra(&["moves", "w(1)+1", "--level", "1", "--json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema"], "v1");
    assert_eq!(doc["kind"], "move_list");
    assert_eq!(doc["level"], 1);
    assert!(!doc["moves"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(hydra(&["moves"]).status.code(), Some(2));
    assert_eq!(hydra(&["height", "w("]).status.code(), Some(2));
    assert_eq!(hydra(&["verify", "--levels", "3..1"]).status.code(), Some(2));
    let o = hydra(&["parse", "D{}(D{}(1))"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn suite_failure_exits_1() {
    let ok = hydra(&["verify", "--hydras", "20", "--max-size", "6", "--levels", "0..1"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).ends_with("PASS\n"));
    let bad = hydra(&["verify", "--hydras", "20", "--max-size", "6", "--levels", "0..1", "--mutation", "append-unit"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).ends_with("FAIL\n"));
}

#[test]
fn seed_comes_from_the_environment() {
    let args = ["play", "D{}(w(1)+1)", "--strategy", "random", "--budget", "200"];
    let explicit = hydra(&[&args[..], &["--seed", "42"]].concat());
    let from_env = Command::new(env!("CARGO_BIN_EXE_hydra"))
        .args(args)
        .env("HYDRA_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(explicit.stdout, from_env.stdout);
}

#[test]
fn play_formats() {
    let csv = stdout(&hydra(&["play", "1+1", "--csv"]));
    assert!(csv.starts_with("step,measure,rule\n0,"));
    let text = stdout(&hydra(&["play", "1", "--strategy", "maxdrop"]));
    assert!(text.ends_with("hydra died after 1 steps\n"));
}

#[test]
fn tree_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.dot");
    let o = hydra(&["tree", "1+1", "--max-nodes", "50", "--dot", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "nodes 4  height 2  truncated false\n");
    let dot = std::fs::read_to_string(path).unwrap();
    assert!(dot.contains("[label=\"Necrosis\"]"));
}

#[test]
fn parse_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.txt");
    std::fs::write(&path, "w( 1 )\n+ 1\n").unwrap();
    assert_eq!(stdout(&hydra(&["parse", path.to_str().unwrap()])), "w(1)+1\n");
}
