//! End-to-end runs of the `tmkit` binary against the corpus.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(file: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(file)
        .display()
        .to_string()
}

fn tmkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmkit"))
        .args(args)
        .env_remove("TMKIT_COLOR")
        .output()
        .expect("run tmkit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_clean_model() {
    let out = tmkit(&["validate", &corpus("heart.tm")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0 errors, 0 warnings\n");
}

#[test]
fn validate_reports_errors_with_exit_one() {
    let dir = std::env::temp_dir().join(format!("tmkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.tm");
    std::fs::write(
        &bad,
        "model \"m\"\nthimac A { create transfer }\nflow A.create -> A.transfer\n",
    )
    .unwrap();
    let out = tmkit(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("ILLEGAL_FLOW"), "{text}");
    assert!(text.ends_with("1 errors, 0 warnings\n"), "{text}");

    let syntax = dir.join("syntax.tm");
    std::fs::write(&syntax, "model \"m\"\nthimac {\n").unwrap();
    let out = tmkit(&["validate", syntax.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn chronologies_lists_heart_orders() {
    let out = tmkit(&["chronologies", &corpus("heart.tm")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "C1,C2,C3,C4\nC1,C3,C2,C4\nC2,C1,C3,C4\ntotal: 3\n"
    );
    let out = tmkit(&["chronologies", "--limit", "1", &corpus("heart.tm")]);
    assert_eq!(stdout(&out), "C1,C2,C3,C4\ntotal: 3\n");
}

#[test]
fn order_names_edge_causes() {
    let out = tmkit(&["order", &corpus("heart.tm")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("  4. C3 -> C4 (trigger)\n"));
}

#[test]
fn simulate_slow_sensor_warns() {
    let out = tmkit(&[
        "simulate",
        &corpus("airbag.tm"),
        "--scenario",
        "slow_sensor",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("WARN E6 sep=6000 bound=5000"), "{text}");
    assert!(!text.contains("E5#"), "{text}");

    let strict = tmkit(&[
        "--strict",
        "simulate",
        &corpus("airbag.tm"),
        "--scenario",
        "slow_sensor",
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn simulate_json_and_unknown_scenario() {
    let out = tmkit(&[
        "simulate",
        &corpus("airbag.tm"),
        "--scenario",
        "crash",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["warnings"].as_array().unwrap().is_empty());

    let out = tmkit(&["simulate", &corpus("airbag.tm"), "--scenario", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn export_dot_and_json() {
    let out = tmkit(&[
        "export",
        &corpus("heart.tm"),
        "--format",
        "dot",
        "--rankdir",
        "TB",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("digraph \"heart transplant\" {\n  rankdir=TB;"));
    assert_eq!(text.matches("style=dashed").count(), 1);

    let out = tmkit(&["export", &corpus("heart.tm"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["tm_schema"], 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tmkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tmkit(&["validate"]).status.code(), Some(2));
    assert_eq!(
        tmkit(&["validate", "/nonexistent/model.tm"]).status.code(),
        Some(2)
    );
    assert_eq!(
        tmkit(&[
            "simulate",
            &corpus("airbag.tm"),
            "--scenario",
            "crash",
            "--horizon",
            "0ms"
        ])
        .status
        .code(),
        Some(2)
    );
}
