use std::process::{Command, Output};

use serde_json::Value;

fn fglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fglab")).args(args).output().expect("fglab runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn task_subcommand_reports_certificates() {
    let out = fglab(&["fgl-axioms", "--p", "2", "--N", "6", "--D", "8", "--group", "honda:2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["outputs"]["height"], 2);
    assert_eq!(r["certificates"]["associative"]["pass"], true);
    assert!(r.get("elapsed_ms").is_none());
}

#[test]
fn negative_multipliers_parse() {
    let out = fglab(&["nseries", "--p", "3", "--N", "4", "--D", "4", "--n", "-1,2"]);
    let r = report(&out);
    assert_eq!(r["outputs"]["series"]["-1"], "-1 * x1 + -1 * x1^2 + -1 * x1^3 + -1 * x1^4");
    assert_eq!(r["outputs"]["series"]["2"], "2 * x1 + -1 * x1^2");
}

#[test]
fn failing_certificate_sets_exit_code_unless_report_only() {
    let args = ["level", "--p", "2", "--N", "8", "--A", "Z/2"];
    let out = fglab(&args);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["verdict"], "fail");
    assert_eq!(r["certificates"]["condition_a_lift"]["pass"], true);
    let mut quiet = args.to_vec();
    quiet.insert(0, "--report-only");
    assert_eq!(fglab(&quiet).status.code(), Some(0));
}

#[test]
fn bad_input_is_an_error_report() {
    let out = fglab(&["level", "--p", "4", "--N", "2", "--A", "Z/2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdict"], "error");
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(fglab(&["quotient", "--p", "2"]).status.code(), Some(2));
    assert_eq!(fglab(&["no-such-task"]).status.code(), Some(2));
}

#[test]
fn scenario_files_and_out_directory() {
    let dir = std::env::temp_dir().join(format!("fglab-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.json");
    std::fs::write(
        &good,
        r#"{"task": "quotient", "p": 2, "N": 8, "D": 8, "A": "Z/2", "expect": {"outputs.phi_wdeg": 2}}"#,
    )
    .unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"task": "quotient", "p": 2, "N": 8, "colour": "red"}"#).unwrap();

    let out = fglab(&["run", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["certificates"]["expect:outputs.phi_wdeg"]["pass"], true);

    let out = fglab(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let reports = dir.join("reports");
    std::fs::create_dir_all(&reports).unwrap();
    let out = fglab(&[
        "--report-only",
        "--out",
        reports.to_str().unwrap(),
        "run",
        good.to_str().unwrap(),
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(reports.join("good.json").exists() && reports.join("bad.json").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}
