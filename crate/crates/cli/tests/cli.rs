use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftopt")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "shiftopt/1");
    v
}

const GREEDY_ZERO: &str =
    r#"{"variant":"OrbitInduced","z":{"variant":"Periodic","word":"0"},"table":[[1,0],[0,0]]}"#;

#[test]
fn jsr_shape() {
    let dir = std::env::temp_dir().join(format!("shiftopt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("w.json");
    std::fs::write(&path, GREEDY_ZERO).unwrap();
    let v = json(&["jsr", "--weights", path.to_str().unwrap(), "--n", "12", "--k-window", "64"]);
    assert_eq!(v["n"], 12);
    assert_eq!(v["upper"], 1);
    assert_eq!(v["lower"], 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn gurvits_shape() {
    let v = json(&["experiment", "gurvits", "--alpha", "0.5", "--max-word-len", "4", "--n", "500", "--k-window", "64"]);
    for key in ["jsr_lower_estimate", "best_word_rate", "target_half_log_alpha"] {
        assert!(v[key].is_number(), "{key}");
    }
}

#[test]
fn lyapunov_and_dbar_agree_on_the_exact_formula() {
    let l = json(&["lyapunov", "--weights", GREEDY_ZERO, "--measure", r#"{"variant":"PeriodicOrbit","word":"001"}"#]);
    assert_eq!(l["value"], "2/3");
    let d = json(&[
        "dbar",
        "--mu",
        r#"{"variant":"PeriodicOrbit","word":"001"}"#,
        "--nu",
        r#"{"variant":"PeriodicOrbit","word":"0"}"#,
        "--l",
        "3",
    ]);
    assert_eq!(d["exact"], "1/3");
    assert_eq!(d["lower"], "1/3");
}

#[test]
fn input_file_supplies_parameters() {
    let input = format!(r#"{{"weights":{GREEDY_ZERO},"word":"0010"}}"#);
    let v = json(&["--input", &input, "norm"]);
    assert_eq!(v["upper"], 3);
    let f = json(&["--input", &input, "--precision", "float", "norm"]);
    assert_eq!(f["upper"], 3.0);
}

#[test]
fn match_and_perturb() {
    let v = json(&["match", "--word", "0110", "--subshift", r#"{"variant":"PeriodicOrbit","word":"01"}"#]);
    assert_eq!(v["distance"], "1/2");
    let p = json(&["perturb", "--omega", "10", "--z", r#"{"variant":"Periodic","word":"100"}"#, "--depth", "3", "--word", "101010", "--k", "0"]);
    assert_eq!(p["levels"].as_array().unwrap().len(), 3);
    assert_eq!(p["upper"]["holds"], true);
}

#[test]
fn csv_and_text_tables() {
    let out = run(&["--csv", "experiment", "tech-strictly", "--max-z-period", "2", "--test-periods", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("difference,lyapunov,mu,one_minus_dbar,z"));
    assert_eq!(lines.count(), 9);
    let out = run(&["--text", "selftest"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("cases"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["norm", "--weights", "{not json", "--word", "01"]).status.code(), Some(2));
    assert_eq!(run(&["norm", "--weights", GREEDY_ZERO, "--word", "012"]).status.code(), Some(2));
    assert_eq!(run(&["experiment", "gurvits", "--alpha", "2"]).status.code(), Some(2));
    assert_eq!(run(&["selftest"]).status.code(), Some(0));
}

#[test]
fn thread_variable_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_shiftopt"))
        .env("THREADS", "lots")
        .arg("selftest")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
