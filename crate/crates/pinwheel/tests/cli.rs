//! Runs the binary end to end.

use std::fs;
use std::process::{Command, Output};

fn pinwheel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinwheel")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_exit_codes() {
    assert_eq!(pinwheel(&["solve", "4,4,4,4"]).status.code(), Some(0));
    assert_eq!(pinwheel(&["solve", "2,3,6", "--complete"]).status.code(), Some(1));
    assert_eq!(pinwheel(&["solve", "2,3,6", "--solver", "fast"]).status.code(), Some(1));
    assert_eq!(pinwheel(&["solve", "4,x"]).status.code(), Some(3));
    assert_eq!(pinwheel(&["solve", "4,5", "--timeout-ms", "0"]).status.code(), Some(3));
}

#[test]
fn solve_emits_a_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cycle.txt");
    let o = pinwheel(&["solve", "2,4,8,8", "--emit-schedule", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cycle = fs::read_to_string(out).unwrap();
    assert!(!cycle.trim().is_empty());
}

#[test]
fn prove_certify_and_theta_gen() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("proof");
    let p = proof.to_str().unwrap();
    let o = pinwheel(&["prove", "--out", p, "--min", "4", "--bound", "3/4", "--theta-min", "12", "--theta-max", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = pinwheel(&["certify", "--dir", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("accept"));
    let o = pinwheel(&["theta-gen", "--dir", p, "5,9,30", "--schedule"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let removed = proof.join("theta-12/removed.csv");
    let body = fs::read_to_string(&removed).unwrap();
    fs::write(&removed, body.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    let o = pinwheel(&["certify", "--dir", p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("reject"));
}

#[test]
fn enumerate_and_unfold() {
    let o = pinwheel(&["enumerate", "--theta", "12", "--min", "4", "--bound", "3/4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3578);
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("r.csv");
    fs::write(&input, "# deferred\n11,11\n").unwrap();
    let o = pinwheel(&["unfold", "--theta", "12", "--bound", "3/4", "--min", "4", "--in", input.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "12,12"));
}

#[test]
fn gen_and_bench_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.txt");
    let csv = dir.path().join("bench.csv");
    let o = pinwheel(&["gen", "--mode", "density", "--count", "3", "--seed", "1", "--out", inst.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&inst).unwrap().lines().count(), 3);
    let o = pinwheel(&[
        "bench", "--instances", inst.to_str().unwrap(), "--solvers", "fast", "--timeout-ms", "2000", "--out",
        csv.to_str().unwrap(), "--seed", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("instance,solver,outcome,elapsed_ms,seed,max_param\n"));
    assert_eq!(text.lines().count(), 4);
}
