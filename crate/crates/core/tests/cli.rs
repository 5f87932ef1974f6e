//! End-to-end tests of the `tardis` binary.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tardis"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn explore_standard_config_passes() {
    let cfg = data("standard.cfg");
    let (code, out, _) = run(&["explore", "--depth", "25", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("stat states="));
    assert!(out.trim_end().ends_with("PASS"));
}

#[test]
fn litmus_sb_prints_histogram() {
    let f = data("litmus/sb.lit");
    let (code, out, _) = run(&[
        "litmus",
        f.to_str().unwrap(),
        "--mode",
        "sc",
        "--runs",
        "500",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("outcome (1,1) count="));
    assert!(!out.contains("outcome (0,0)"), "{out}");
}

#[test]
fn litmus_sb_tso_reports_relaxed_outcome() {
    let f = data("litmus/sb.lit");
    let (code, out, _) = run(&[
        "litmus",
        f.to_str().unwrap(),
        "--mode",
        "tso",
        "--runs",
        "200",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("relaxed (0,0) allowed under tso"));
}

#[test]
fn missing_config_is_a_usage_error() {
    let (code, _, err) = run(&["explore", "/nonexistent/standard.cfg"]);
    assert_eq!(code, 2);
    assert!(err.contains("error"));
}

#[test]
fn bad_flags_are_usage_errors() {
    let cfg = data("standard.cfg");
    assert_eq!(
        run(&["explore", cfg.to_str().unwrap(), "--mode", "pso"]).0,
        2
    );
    assert_eq!(
        run(&["explore", cfg.to_str().unwrap(), "--memory", "maybe"]).0,
        2
    );
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&[]).0, 2);
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cfg");
    std::fs::write(&p, "cores = 2\naddrs = 1\nprog 0: Jump 0\n").unwrap();
    let (code, _, err) = run(&["run", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn run_trace_round_trips_through_check_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let cfg = data("standard.cfg");
    let (code, _, _) = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.contains("commit core="));
    let (code, out, _) = run(&["check-trace", trace.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("stat commits=4"));
}

#[test]
fn check_trace_flags_a_bad_load() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bad.txt");
    std::fs::write(
        &trace,
        "init addr=0 val=0\n\
         commit core=0 seq=0 op=St addr=0 val=5 ts=1 phys=1\n\
         commit core=1 seq=0 op=Ld addr=0 val=0 ts=3 phys=2\n",
    )
    .unwrap();
    let (code, out, _) = run(&["check-trace", trace.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL"), "{out}");
}

#[test]
fn overrides_change_the_configuration() {
    let cfg = data("standard.cfg");
    let (code, out, _) = run(&[
        "explore",
        cfg.to_str().unwrap(),
        "--depth",
        "12",
        "--memory",
        "on",
        "--lease",
        "3",
        "--fifo",
        "per-address",
        "--loadhit-guard",
        "table2",
    ]);
    assert_eq!(code, 0, "{out}");
    let (_, plain, _) = run(&["explore", cfg.to_str().unwrap(), "--depth", "12"]);
    assert_ne!(out, plain);
}

#[test]
fn identical_arguments_give_identical_reports() {
    let cfg = data("lease.cfg");
    let a = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--leases",
        "0,1,4",
    ]);
    let b = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--leases",
        "0,1,4",
    ]);
    assert_eq!(a, b);
    let c = run(&[
        "explore",
        cfg.to_str().unwrap(),
        "--depth",
        "14",
        "--jobs",
        "4",
    ]);
    let d = run(&[
        "explore",
        cfg.to_str().unwrap(),
        "--depth",
        "14",
        "--jobs",
        "1",
    ]);
    assert_eq!(c, d);
}

#[test]
fn adversarial_run_completes() {
    let cfg = data("standard-memory.cfg");
    let (code, out, _) = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--adversarial",
        "--steps",
        "200",
    ]);
    assert_eq!(code, 0, "{out}");
}
