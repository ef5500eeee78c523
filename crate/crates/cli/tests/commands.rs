use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsphere")).args(args).env_remove("QSPHERE_BUDGET").output().expect("binary runs")
}

fn reports(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is a JSON report"))
        .collect()
}

fn single(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let mut r = reports(&out);
    assert_eq!(r.len(), 1, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap(), r.remove(0))
}

#[test]
fn verify_twisted_on_the_four_sphere_passes() {
    let (code, r) = single(&["verify", "--sphere", "5", "--projector", "twisted"]);
    assert_eq!(code, 0);
    assert_eq!(r["schema"], "qsphere-report/1");
    assert_eq!(r["check"], "verify");
    assert_eq!(r["pass"], true);
    assert_eq!(r["residual_term_count"], 0);
}

#[test]
fn charge_on_the_two_sphere_is_minus_one() {
    let (code, r) = single(&["charge", "--sphere", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["value"], -1);
}

#[test]
fn cotangent_rank_is_n_minus_one() {
    let (code, r) = single(&["rank", "--sphere", "6", "--projector", "cotangent"]);
    assert_eq!(code, 0);
    assert_eq!(r["value"], 5);
}

#[test]
fn normal_form_of_the_radius() {
    let (code, r) = single(&["normal-form", "--sphere", "4", "--expr", "x2* x2 + x1* x1"]);
    assert_eq!(code, 0);
    assert_eq!(r["value"], "1");
}

#[test]
fn relations_check_and_classical_pass() {
    assert_eq!(single(&["relations-check", "--sphere", "4"]).0, 0);
    let (code, r) = single(&["classical", "--sphere", "5", "--samples", "20", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(r["value"]["rank"], 2);
    assert!(r["numeric_residuals"]["idempotent"]["value"].as_f64().unwrap() < 1e-12);
}

#[test]
fn numeric_commands_pass_at_default_tolerances() {
    let (code, r) = single(&["rep-check", "--q", "0.8", "--sign", "minus", "--cutoff", "12"]);
    assert_eq!(code, 0, "{r}");
    let (code, r) = single(&["trace-class"]);
    assert_eq!(code, 0, "{r}");
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let (code, r) = single(&["trace-class", "--max-cutoff", "10"]);
    assert_eq!(code, 1);
    assert_eq!(r["pass"], false);
}

#[test]
fn built_presentation_file_round_trips_through_the_commands() {
    let dir = std::env::temp_dir().join(format!("qsphere-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("s4.pres");
    let (code, _) = single(&["build-presentation", "--N", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, r) = single(&["verify", "--presentation", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["sphere"], "S4_q");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify"][..],
        &["frobnicate"],
        &["charge", "--sphere", "4"],
        &["normal-form", "--sphere", "3", "--expr", ""],
        &["normal-form", "--sphere", "3", "--expr", "x7"],
        &["verify", "--sphere", "2"],
        &["verify", "--sphere", "3", "--presentation", "/nonexistent"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn budget_override_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_qsphere"))
        .args(["verify", "--sphere", "6"])
        .env("QSPHERE_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn reports_are_stable_apart_from_elapsed_time() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("elapsed_ms");
        v
    };
    let a = strip(single(&["verify", "--sphere", "4", "--projector", "normal"]).1);
    let b = strip(single(&["verify", "--sphere", "4", "--projector", "normal", "--sequential"]).1);
    assert_eq!(a, b);
}
