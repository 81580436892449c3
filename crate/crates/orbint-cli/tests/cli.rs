//! End-to-end checks of the command-line interface: output shapes and exit
//! codes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orbint"))
}

#[test]
fn verify_small_sweep_exits_zero() {
    let out = bin()
        .args([
            "verify", "--q", "2,3", "--rmax", "4", "--lambda", "both", "--no-brute", "--out",
            "csv",
        ])
        .output()
        .expect("run verify");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("check,q,inv,lambda,provenance"));
    assert!(stdout.lines().skip(1).all(|l| l.ends_with("true")));
    assert!(stdout.lines().count() > 100);
}

#[test]
fn orbital_iwahori_central_value() {
    let out = bin()
        .args(["orbital", "--q", "3", "--inv", "ram:1:-1", "--fn", "iw"])
        .output()
        .expect("run orbital");
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json output");
    assert_eq!(v["central"], "1");
    assert_eq!(v["feq_ok"], true);
}

#[test]
fn count_table_matches() {
    let out = bin()
        .args(["count", "--q", "2", "--amax", "3"])
        .output()
        .expect("run count");
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let mut rows = 0;
    for line in stdout.lines().skip(1) {
        assert!(line.ends_with(",true"), "row fails: {line}");
        rows += 1;
    }
    assert!(rows > 50);
}

#[test]
fn tree_shape_output() {
    let out = bin()
        .args(["tree", "--q", "3", "--inv", "inert:4:2"])
        .output()
        .expect("run tree");
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("shape: vertex_ball(1)"), "{stdout}");
}

#[test]
fn intersect_breakdown() {
    let out = bin()
        .args(["intersect", "--q", "2", "--lambda", "3/4", "--inv", "inert:2:0", "--geometric"])
        .output()
        .expect("run intersect");
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json");
    assert_eq!(v["int"], "6"); // 2q + 2 at q = 2
}

#[test]
fn usage_errors_exit_two() {
    let out = bin()
        .args(["orbital", "--q", "3", "--inv", "bogus", "--fn", "iw"])
        .output()
        .expect("run with bad invariant");
    assert_eq!(out.status.code(), Some(2));
    // unmatched intersection request is a domain error as well
    let out = bin()
        .args(["intersect", "--q", "3", "--lambda", "1/4", "--inv", "ram:3:-1"])
        .output()
        .expect("run unmatched intersect");
    assert_eq!(out.status.code(), Some(2));
}
