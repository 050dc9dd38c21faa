mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

use tcnet::cli::run;
use tcnet::enewick::parse_document;
use tcnet::sequence::parse_sequence;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn tcnet(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tcnet").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_identical_trees() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "in.nwk", "# two copies\n((1,2),3);\n((1,2),3);\n");
    let o = tcnet(&["solve", s(&f)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(o.stdout, "1,2\n2,3\n((1,2),3);\n");
}

#[test]
fn solve_prints_sequence_then_network() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "in.nwk", "((1,2),3);\n((1,3),2);\n");
    let o = tcnet(&["solve", s(&f), "--stats", "--prune"]);
    assert_eq!(o.code, 0);
    let lines: Vec<&str> = o.stdout.lines().collect();
    let pairs = parse_sequence(&lines[..lines.len() - 1].join("\n")).unwrap();
    assert_eq!(pairs.len(), 3);
    let net = &parse_document(lines[lines.len() - 1]).unwrap().networks[0];
    assert_eq!(net.reticulation_number(), 1);
    assert!(o.stderr.contains("weight: 1"));
    assert!(o.stderr.contains("max_branch_width:"));
}

#[test]
fn solve_reports_incompatibility() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "in.nwk", "((x)#H1,(#H1,y));\n((y)#H1,(#H1,x));\n");
    let o = tcnet(&["solve", s(&f)]);
    assert_eq!(o.code, 1);
    assert!(o
        .stdout
        .starts_with("incompatible: network 1 has reticulated cherry (x,y)"));
}

#[test]
fn solve_budget_exhaustion() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "in.nwk", "((1,2),3);\n((1,3),2);\n");
    let o = tcnet(&["solve", s(&f), "--max-k", "0"]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.is_empty());
    assert!(o.stderr.contains("at most 0"));
}

#[test]
fn solve_rejects_mixed_leaf_sets() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "in.nwk", "((1,2),3);\n((1,2),4);\n");
    let o = tcnet(&["solve", s(&f)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("different leaf set"));
}

#[test]
fn solve_rejects_non_tree_child_input() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "in.nwk", "((((3)#H2)#H1,1),(#H1,(#H2,2)));\n");
    let o = tcnet(&["solve", s(&f)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("not tree-child"));
}

#[test]
fn reduce_and_construct() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "in.nwk", "((1,2),3);\n((1,3),2);\n");
    let seq = write(&dir, "seq.txt", "1,2\n");
    let o = tcnet(&["reduce", s(&f), "--seq", s(&seq)]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "(2,3);\n((1,3),2);\n");

    let seq = write(&dir, "seq.txt", "x,y\nx,y\n");
    let o = tcnet(&["construct", "--seq", s(&seq)]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "((x)#H1,(#H1,y));\n");
}

#[test]
fn construct_rejects_non_tree_child_sequences() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "seq.txt", "x,y\ny,x\n");
    let o = tcnet(&["construct", "--seq", s(&seq)]);
    assert_eq!(o.code, 2);
    let seq = write(&dir, "bad.txt", "x;y\n");
    let o = tcnet(&["construct", "--seq", s(&seq)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("line 1"));
}

#[test]
fn check_reports_flags_and_witness() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "in.nwk", "((x)#H1,(#H1,y));\n((y)#H1,(#H1,x));\n");
    let o = tcnet(&["check", s(&f)]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.starts_with(
        "network 1: binary=true stack_free=true tree_child=true reticulation_number=1\n"
    ));
    assert!(o.stdout.contains("incompatible:"));

    let f = write(&dir, "stack.nwk", "((((3)#H2)#H1,1),(#H1,(#H2,2)));\n");
    let o = tcnet(&["check", s(&f)]);
    assert_eq!(o.code, 0);
    assert_eq!(
        o.stdout,
        "network 1: binary=true stack_free=false tree_child=false reticulation_number=2\n"
    );
}

#[test]
fn malformed_inputs_exit_with_position() {
    let dir = TempDir::new().unwrap();
    for (i, text) in common::MALFORMED.iter().enumerate() {
        let f = write(&dir, &format!("bad{i}.nwk"), text);
        let o = tcnet(&["check", s(&f)]);
        assert_eq!(o.code, 2, "{text:?}");
        assert!(
            o.stderr.contains("line ") && o.stderr.contains("column "),
            "{text:?}: {}",
            o.stderr
        );
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn missing_file_is_an_input_error() {
    let o = tcnet(&["check", "/nonexistent/instance.nwk"]);
    assert_eq!(o.code, 2);
}

#[test]
fn usage_errors() {
    assert_eq!(tcnet(&[]).code, 3);
    assert_eq!(tcnet(&["frobnicate"]).code, 3);
    assert_eq!(tcnet(&["solve"]).code, 3);
    assert_eq!(tcnet(&["solve", "x", "--max-k", "many"]).code, 3);
    assert_eq!(tcnet(&["generate", "--taxa", "1", "--weight", "1"]).code, 3);
    assert_eq!(
        tcnet(&["generate", "--taxa", "20", "--weight", "1"]).code,
        3
    );
    let help = tcnet(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("solve"));
}

#[test]
fn generate_is_reproducible_and_solvable() {
    let args = [
        "generate", "--taxa", "5", "--weight", "2", "--count", "3", "--seed", "17",
    ];
    let a = tcnet(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, tcnet(&args).stdout);
    assert!(a.stdout.starts_with("# taxa=5 weight=2 seed=17 count=3\n"));
    let doc = parse_document(&a.stdout).unwrap();
    assert_eq!(doc.networks.len(), 3);

    let dir = TempDir::new().unwrap();
    let f = write(&dir, "gen.nwk", &a.stdout);
    let o = tcnet(&["solve", s(&f), "--parallel"]);
    assert_eq!(o.code, 0);
    let net = parse_document(o.stdout.lines().last().unwrap()).unwrap();
    assert!(net.networks[0].reticulation_number() <= 2);
}

#[test]
fn binary_streams_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let exe = env!("CARGO_BIN_EXE_tcnet");
    let f = write(&dir, "in.nwk", "((1,2),3);\n((1,3),2);\n");
    let out = Command::new(exe)
        .args(["solve", s(&f), "--stats"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.ends_with(";\n"));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("nodes_expanded"));

    let bad = write(&dir, "bad.nwk", "((1,2);\n");
    let out = Command::new(exe).args(["check", s(&bad)]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("line 1, column 7"));

    let out = Command::new(exe).arg("--version").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(exe).arg("solve").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}
