use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_slocc-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SLOCC_LAB_BUDGET").output().expect("binary runs")
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn ghz_file_has_two_entries() {
    let out = run(&["state", "make", "--ghz", "2", "--parties", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);
    assert_eq!(v["scalar_domain"], "rational");
}

#[test]
fn built_w_certificate_verifies_from_stdin() {
    let cert = run(&["degen", "build", "--w", "--parties", "3"]);
    assert!(cert.status.success());
    let out = run_with_stdin(&["degen", "verify"], &cert.stdout);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["valid"], true);
    assert_eq!((v["result"]["measured_d"].as_u64(), v["result"]["measured_e"].as_u64()), (Some(1), Some(2)));
}

#[test]
fn tampered_certificate_exits_one() {
    let cert = run(&["degen", "build", "--w", "--parties", "3"]);
    let mut v: Value = serde_json::from_slice(&cert.stdout).unwrap();
    v["d"] = Value::from(2);
    let out = run_with_stdin(&["degen", "verify"], v.to_string().as_bytes());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["valid"], false);
}

#[test]
fn sweep_rates_stay_below_entropy() {
    let out = run(&["cw", "sweep", "--k", "3", "--n", "1..4", "--seeds", "100"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "best_rate").unwrap();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r[col].parse::<f64>().unwrap() <= 0.9183);
    }
}

#[test]
fn runs_are_byte_identical() {
    let args = ["cw", "run", "--k", "3", "--n", "2", "--seed", "7", "--realize"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["result"]["realized"], true);
    assert!(v["result"]["survivors"].is_array());
}

#[test]
fn tensor_files_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    assert!(run(&["state", "make", "--w", "--parties", "3", "--out", w.to_str().unwrap()]).status.success());
    let squared = run(&["tensor", "product", "--left", w.to_str().unwrap(), "--power", "2"]);
    assert!(squared.status.success());
    let v = json(&squared);
    assert_eq!(v["entries"].as_array().unwrap().len(), 9);
    let rank = run(&["tensor", "rank", "--input", w.to_str().unwrap(), "--cut", "0"]);
    assert_eq!(json(&rank)["result"]["rank"], 2);
    let text = std::fs::read_to_string(&w).unwrap();
    let again = run_with_stdin(&["tensor", "product", "--left", w.to_str().unwrap(), "--power", "1"], b"");
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn schmidt_table_for_w4() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w4.json");
    run(&["state", "make", "--w", "--parties", "4", "--out", w.to_str().unwrap()]);
    let out = run(&["slocc", "profile", "--input", w.to_str().unwrap(), "--table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().skip(1).all(|l| l.trim_end().ends_with('2')));
}

#[test]
fn support_report_for_w3() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w3.json");
    run(&["state", "make", "--w", "--parties", "3", "--out", w.to_str().unwrap()]);
    let out = run(&["support", "--state", w.to_str().unwrap(), "--theta", "u"]);
    assert_eq!(json(&out)["result"]["rho_upper_est"], "0.918296");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["avgfree", "verify", "--m", "2", "--elements", "1,2,3"]).status.code(), Some(1));
    assert_eq!(run(&["avgfree", "verify", "--m", "2", "--elements", "1,2,4"]).status.code(), Some(0));
    assert_eq!(run(&["state", "make", "--w"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["cw", "run", "--k", "3", "--n", "9", "--budget", "1000"]).status.code(), Some(2));
}

#[test]
fn budget_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    run(&["degen", "build", "--w", "--parties", "3", "--out", cert.to_str().unwrap()]);
    let args = ["interpolate", "--cert", cert.to_str().unwrap(), "--power", "2", "--verify"];
    let limited = Command::new(BIN).args(args).env("SLOCC_LAB_BUDGET", "10").output().unwrap();
    assert_eq!(limited.status.code(), Some(2));
    let ok = run(&args);
    assert!(ok.status.success());
    assert_eq!(json(&ok)["result"]["check"]["ok"], true);
}
