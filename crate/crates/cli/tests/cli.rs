//! End-to-end tests of the binary: exit codes, report formats, and the
//! file-producing subcommands.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn ctlsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctlsync"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

#[test]
fn check_reports_witness_and_exits_zero_when_satisfied() {
    let out = ctlsync(&[
        "check",
        "--model",
        model("stutter_pair.kripke").to_str().unwrap(),
        "--formula",
        "[p UA !p]",
        "--state",
        "t1",
        "--witness",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("t1: holds (witness 3)"));
}

#[test]
fn check_exits_one_when_unsatisfied() {
    let out = ctlsync(&[
        "check",
        "--model",
        model("stutter_pair.kripke").to_str().unwrap(),
        "--formula",
        "[p UA !p]",
        "--state",
        "u1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("u1: fails"));
}

#[test]
fn check_defaults_to_init_state() {
    let out = ctlsync(&[
        "check",
        "--model",
        model("funnel.kripke").to_str().unwrap(),
        "--formula",
        "FA q",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn check_json_round_trips() {
    let out = ctlsync(&[
        "check",
        "--model",
        model("funnel.kripke").to_str().unwrap(),
        "--formula",
        "FA q",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["formula"], "FA q");
    assert!(v["time_ms"].as_f64().is_some());
    let states = v["states"].as_array().unwrap();
    assert_eq!(states.len(), 6);
    assert_eq!(states[0]["name"], "uI");
    assert_eq!(states[0]["holds"], true);
    assert_eq!(states[0]["witness"], "2");
    // Re-serializing the parsed value preserves every field.
    let reparsed: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, reparsed);
}

#[test]
fn check_rejects_dead_end_states_without_repair_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deadend.kripke");
    std::fs::write(&path, "kripke\nstate a\nstate b\nedge a b\n").unwrap();
    let out = ctlsync(&[
        "check",
        "--model",
        path.to_str().unwrap(),
        "--formula",
        "EX true",
        "--state",
        "a",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("totality"));
    let out = ctlsync(&[
        "check",
        "--model",
        path.to_str().unwrap(),
        "--formula",
        "EX true",
        "--state",
        "a",
        "--complete-selfloops",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn check_without_state_or_init_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noinit.kripke");
    std::fs::write(&path, "kripke\nstate a\nedge a a\n").unwrap();
    let out = ctlsync(&[
        "check",
        "--model",
        path.to_str().unwrap(),
        "--formula",
        "true",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("init"));
}

#[test]
fn bad_formula_reports_position_and_exits_two() {
    let out = ctlsync(&[
        "check",
        "--model",
        model("funnel.kripke").to_str().unwrap(),
        "--formula",
        "FA q |",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("column"));
}

#[test]
fn quotient_writes_model_and_prints_block_map() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("quotient.kripke");
    let out = ctlsync(&[
        "quotient",
        "--model",
        model("next_pair.kripke").to_str().unwrap(),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let map = stdout(&out);
    assert_eq!(map.lines().count(), 8);
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("kripke\n"));
    // t3 and u4 behave identically and share a block.
    let t3_block = map
        .lines()
        .find(|l| l.starts_with("t3 "))
        .unwrap()
        .split_whitespace()
        .nth(1)
        .unwrap()
        .to_string();
    let u4_block = map
        .lines()
        .find(|l| l.starts_with("u4 "))
        .unwrap()
        .split_whitespace()
        .nth(1)
        .unwrap();
    assert_eq!(t3_block, u4_block);
}

#[test]
fn reduce_favorall_instance_checks_as_satisfiable() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("gadget.kripke");
    let out = ctlsync(&[
        "reduce",
        "cnf-favorall",
        "--dimacs",
        model("sample.cnf").to_str().unwrap(),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let check = ctlsync(&[
        "check",
        "--model",
        out_path.to_str().unwrap(),
        "--formula",
        "FA q",
    ]);
    // sample.cnf is satisfiable, so the instance must satisfy FA q at init.
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn reduce_indist_writes_both_structures() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("pair.kripke");
    let out = ctlsync(&[
        "reduce",
        "indist",
        "--dimacs",
        model("sample.cnf").to_str().unwrap(),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(out_path.exists());
    assert!(dir.path().join("pair.kripke.fixed").exists());
}

#[test]
fn fuzz_is_clean_and_deterministic() {
    let run = || {
        ctlsync(&[
            "fuzz", "--trials", "40", "--states", "4", "--seed", "7",
        ])
    };
    let a = run();
    assert_eq!(a.status.code(), Some(0), "stderr: {}", stderr(&a));
    assert!(stdout(&a).contains("mismatches: 0"));
    let b = run();
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn fuzz_rejects_oversized_state_bound() {
    let out = ctlsync(&[
        "fuzz", "--trials", "1", "--states", "13", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn distinguish_finds_next_formula_and_reports_absence_without_next() {
    let with_next = ctlsync(&[
        "distinguish",
        "--model",
        model("next_pair.kripke").to_str().unwrap(),
        "--s1",
        "t1",
        "--s2",
        "u1",
        "--depth",
        "3",
    ]);
    assert_eq!(with_next.status.code(), Some(0));
    assert!(!stdout(&with_next).contains("none"));

    let without = ctlsync(&[
        "distinguish",
        "--model",
        model("next_pair.kripke").to_str().unwrap(),
        "--s1",
        "t1",
        "--s2",
        "u1",
        "--depth",
        "3",
        "--no-next",
    ]);
    assert_eq!(without.status.code(), Some(0));
    assert_eq!(stdout(&without).trim(), "none up to depth 3");
}

#[test]
fn stutter_multiplies_states() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("stuttered.kripke");
    let out = ctlsync(&[
        "stutter",
        "--model",
        model("funnel.kripke").to_str().unwrap(),
        "-n",
        "3",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("state ")).count(), 18);
    assert!(text.contains("init uI_1"));
}
