//! End-to-end runs of the command-line interface: the documented commands,
//! their exit codes, and file round-trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redlab"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

const EX1: &str = "pair ab a\npair b bb\n";
const DRIFT: &str = "lines 1\nrule 1 0 1 1 1/1\nrule 1 1 1 1 1/1\n";
const STAY: &str = "lines 1\nrule 1 0 1 0 1/1\nrule 1 1 1 0 1/1\n";
const TINY_C: &str = "zstate q0\nzstate qf\nzinit q0\nzfinal qf\nztrans q0 0 1 qf\nztrans q0 1 1 qf\n";
const TINY_D: &str = "zstate g0\nzstate gf\nzinit g0\nzfinal gf\nztrans g0 0 2 gf\nztrans g0 1 1 gf\n";

#[test]
fn pcp_solve_finds_the_documented_solution() {
    let dir = workdir("pcp_solve");
    let file = write(&dir, "ex1.pcp", EX1);
    let out = run(&["pcp", "solve", file.to_str().unwrap(), "--max-len", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("solution 1,2"));
}

#[test]
fn pcp_solve_is_inconclusive_without_a_solution() {
    let dir = workdir("pcp_noluck");
    let file = write(&dir, "grow.pcp", "pair a aa\n");
    let out = run(&["pcp", "solve", file.to_str().unwrap(), "--max-len", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pcp_witness_verifies_the_membership_triple() {
    let dir = workdir("pcp_witness");
    let file = write(&dir, "ex1.pcp", EX1);
    let out = run(&["pcp", "witness", file.to_str().unwrap(), "--seq", "1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("witness (i1i2abb, 8)"));
    assert!(text.contains("L0 true"));
    assert!(text.contains("Lu false"));
    assert!(text.contains("Lv false"));

    let out = run(&["pcp", "witness", file.to_str().unwrap(), "--seq", "1"]);
    assert_eq!(out.status.code(), Some(1), "a non-solution is verified false");
}

#[test]
fn pcp_scan_reports_zero_violations() {
    let dir = workdir("pcp_scan");
    let file = write(&dir, "ex1.pcp", EX1);
    let out = run(&[
        "pcp", "scan", file.to_str().unwrap(), "--max-seq", "2", "--max-word", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("violations 0"));
}

#[test]
fn nds_search_and_prob() {
    let dir = workdir("nds");
    let drift = write(&dir, "drift.nds", DRIFT);
    let stay = write(&dir, "stay.nds", STAY);

    let out = run(&["nds", "search", drift.to_str().unwrap(), "--max-len", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("critical 0"));

    let out = run(&["nds", "search", stay.to_str().unwrap(), "--max-len", "5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["nds", "prob", drift.to_str().unwrap(), "--word", "00"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("p 2 1 1/1"));
}

#[test]
fn subs_decide_and_witness() {
    let dir = workdir("subs");
    let stay = write(&dir, "stay.nds", STAY);
    let drift = write(&dir, "drift.nds", DRIFT);

    let out = run(&["subs", "decide", stay.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("equal"));

    let out = run(&["subs", "decide", drift.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("counterexample"));

    let out = run(&["subs", "witness", drift.to_str().unwrap(), "--critical", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("in-phi true"));
    assert!(text.contains("in-xi false"));

    // a non-critical word is an input error
    let out = run(&["subs", "witness", stay.to_str().unwrap(), "--critical", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reduce_pipeline_round_trips() {
    let dir = workdir("reduce");
    let c = write(&dir, "tiny_c.zt", TINY_C);
    let d = write(&dir, "tiny_d.zt", TINY_D);
    let nds_path = dir.join("tiny.nds");

    let out = run(&[
        "reduce", "zt-to-nds", c.to_str().unwrap(), d.to_str().unwrap(),
        "-o", nds_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("lines 8"));

    let out = run(&["nds", "search", nds_path.to_str().unwrap(), "--max-len", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("critical 00"));

    let out = run(&[
        "reduce", "check", c.to_str().unwrap(), d.to_str().unwrap(), "--bound", "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("forward counterexample 0 1"));
    assert!(text.contains("conclusion inclusion-fails"));

    let phi = dir.join("phi.sub");
    let xi = dir.join("xi.sub");
    let drift = write(&dir, "drift.nds", DRIFT);
    let out = run(&[
        "reduce", "nds-to-subs", drift.to_str().unwrap(),
        "-o", phi.to_str().unwrap(), xi.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(phi.exists() && xi.exists());
}

#[test]
fn reduce_check_is_inconclusive_on_equal_machines() {
    let dir = workdir("reduce_eq");
    let c = write(&dir, "tiny_c.zt", TINY_C);
    let out = run(&[
        "reduce", "check", c.to_str().unwrap(), c.to_str().unwrap(), "--bound", "6",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("inconclusive-consistent"));
}

#[test]
fn zt_build_chi_and_run() {
    let dir = workdir("zt");
    let pcp = write(&dir, "ex1.pcp", EX1);
    let machine = dir.join("chi_l0.zt");
    let out = run(&[
        "zt", "build-chi", pcp.to_str().unwrap(), "--side", "l0",
        "-o", machine.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("deterministic true complete true"));

    // coded (i1a, 3): delta(i1) delta(a) 0, count 16
    let out = run(&["zt", "run", machine.to_str().unwrap(), "--word", "1000001100010"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("outputs 16"));

    let out = run(&["zt", "run", machine.to_str().unwrap(), "--word", "11"]);
    assert!(stdout(&out).contains("outputs -"));
}

#[test]
fn export_round_trips_and_dot() {
    let dir = workdir("export");
    let zt = write(&dir, "tiny_c.zt", TINY_C);
    let text = dir.join("tiny_c_again.zt");
    let out = run(&[
        "export", "text", zt.to_str().unwrap(), "-o", text.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // normalized text re-parses and re-emits identically
    let once = std::fs::read_to_string(&text).unwrap();
    let again = dir.join("tiny_c_third.zt");
    run(&["export", "text", text.to_str().unwrap(), "-o", again.to_str().unwrap()]);
    assert_eq!(once, std::fs::read_to_string(&again).unwrap());

    let dot = dir.join("tiny_c.dot");
    let out = run(&["export", "dot", zt.to_str().unwrap(), "-o", dot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn parse_errors_exit_3_with_line_numbers() {
    let dir = workdir("errors");
    let bad = write(&dir, "bad.pcp", "pair ab a\npear b bb\n");
    let out = run(&["pcp", "solve", bad.to_str().unwrap(), "--max-len", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("line 2"), "stderr: {err}");
    assert!(err.contains("pair <u> <v>"), "stderr: {err}");

    let out = run(&["pcp", "solve", dir.join("missing.pcp").to_str().unwrap(), "--max-len", "3"]);
    assert_eq!(out.status.code(), Some(3));
}
