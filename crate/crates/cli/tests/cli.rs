use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_densalg"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn write_temp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("densalg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn f1_suite_passes() {
    let out = run(&[
        "check",
        scenario("f1.json").to_str().unwrap(),
        "--report",
        "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let r = json(&out);
    assert_eq!(r["passed"], true);
    let cmds = r["commands"].as_array().unwrap();
    assert_eq!(cmds.len(), 6);
    assert!(cmds.iter().all(|c| c["outcome"] == "pass"));
    assert!(cmds.iter().all(|c| c["millis"].is_number()));
    assert_eq!(r["fixture"]["gamma"][0], "-2*x");
}

#[test]
fn every_shipped_scenario_but_the_broken_one_passes() {
    for name in ["f1.json", "f2.json", "f3_sturm.json", "f4_bv.json"] {
        let out = run(&["check", scenario(name).to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn broken_connection_fails_jacobi_with_residual() {
    let out = run(&[
        "check",
        scenario("f2_broken.json").to_str().unwrap(),
        "--report",
        "json",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["passed"], false);
    let jac = r["commands"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["command"] == "jacobi")
        .unwrap();
    assert_eq!(jac["outcome"], "fail");
    let res = jac["residuals"].as_array().unwrap();
    assert_eq!(res.len(), 1);
    assert_eq!(res[0]["name"], "R1");
    assert_eq!(res[0]["value"], "(-xi)*p_x*p_xi + (x)*p_x^2");
    assert!(r["fixture"]["gamma"][0] == "x*xi");
    let d2 = r["commands"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["command"] == "delta-squared")
        .unwrap();
    assert_eq!(d2["outcome"], "pass");
    assert!(d2["values"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["name"] == "order" && v["value"] == "3"));
}

#[test]
fn empty_command_list_passes() {
    let p = write_temp(
        "empty.json",
        r#"{"coordinates": [{"name": "x", "parity": "even"}], "parity": "even", "S": [["1"]], "gamma": ["0"], "commands": []}"#,
    );
    let out = run(&["check", p.to_str().unwrap(), "--report", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["commands"].as_array().unwrap().len(), 0);
}

#[test]
fn only_filters_commands() {
    let out = run(&[
        "check",
        scenario("f2_broken.json").to_str().unwrap(),
        "--only",
        "build-pencil",
        "--report",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let cmds = r["commands"].as_array().unwrap();
    assert_eq!(cmds.len(), 1);
    assert_eq!(cmds[0]["command"], "build-pencil");
}

#[test]
fn unknown_command_name_is_a_usage_error() {
    let out = run(&[
        "check",
        scenario("f1.json").to_str().unwrap(),
        "--only",
        "frobnicate",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_syntax_error_has_position() {
    let p = write_temp(
        "bad.json",
        "{\n  \"coordinates\": [\n    {\"name\": \"x\" \"parity\": \"even\"}\n  ]\n}",
    );
    let out = run(&["check", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3:"), "{err}");
}

#[test]
fn expression_syntax_error_names_field_and_column() {
    let p = write_temp(
        "badexpr.json",
        r#"{"coordinates": [{"name": "x", "parity": "even"}], "parity": "even", "S": [["1"]], "gamma": ["x +* 2"]}"#,
    );
    let out = run(&["check", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma[0]"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn odd_coordinate_in_even_only_command_is_rejected() {
    let p = write_temp(
        "oddsturm.json",
        r#"{"coordinates": [{"name": "xi", "parity": "odd"}], "lambda": 2, "parity": "even", "S": [["0"]], "gamma": ["0"],
            "change": {"coordinates": [{"name": "eta", "expr": "2*xi"}]}, "commands": [{"run": "sturm-demo"}]}"#,
    );
    let out = run(&["check", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("single even coordinate"), "{err}");
}

#[test]
fn runtime_errors_are_captured_per_command() {
    let p = write_temp(
        "singular.json",
        r#"{"coordinates": [{"name": "x", "parity": "even"}], "parity": "even", "S": [["1"]], "gamma": ["x"],
            "commands": [{"run": "recover", "w0": "1/2"}, {"run": "bracket-roundtrip"}]}"#,
    );
    let out = run(&["check", p.to_str().unwrap(), "--report", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    let cmds = r["commands"].as_array().unwrap();
    assert_eq!(cmds[0]["outcome"], "error");
    assert_eq!(cmds[1]["outcome"], "pass");
}

#[test]
fn reports_are_deterministic() {
    let f = scenario("f4_bv.json");
    let a = run(&[
        "check",
        f.to_str().unwrap(),
        "--report",
        "json",
        "--no-timing",
    ]);
    let b = run(&[
        "check",
        f.to_str().unwrap(),
        "--report",
        "json",
        "--no-timing",
        "--sequential",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn print_is_idempotent() {
    let once = run(&["print", scenario("f4_bv.json").to_str().unwrap()]);
    assert_eq!(once.status.code(), Some(0));
    let p = write_temp("printed.json", &String::from_utf8_lossy(&once.stdout));
    let twice = run(&["print", p.to_str().unwrap()]);
    assert_eq!(once.stdout, twice.stdout);
}

#[test]
fn demos_run() {
    let out = run(&["demo", "sturm"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("U' = y_x^-2 (U + s/2 Schwarzian)"), "{text}");
    let out = run(&["demo", "bv", "--report", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let bv = r["commands"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["command"] == "bv-master")
        .unwrap();
    assert!(bv["values"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["name"] == "H" && v["value"] == "-1/4*x^3*xi + 1/2*x^2*y*eta + 1/2*eta"));
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = run(&["check", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
}
