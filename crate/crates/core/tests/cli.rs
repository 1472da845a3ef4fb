//! End-to-end runs of the command line binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_invlift"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn invlift")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("artifact JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("invlift-cli-{}-{name}", std::process::id()))
}

#[test]
fn describe_reports_the_generator_data() {
    let out = run(&["describe", "--family", "symmetric_complex", "--n", "3"]);
    let v = stdout_json(&out);
    assert_eq!(v["tool"], "invlift");
    assert_eq!(v["format"], 1);
    assert_eq!(v["artifact"], "description");
    let r = &v["result"];
    assert_eq!(r["degrees"], serde_json::json!([1, 2, 3]));
    assert_eq!(r["fiber_degree"], 3);
    assert_eq!(r["real"], false);
    assert_eq!(r["generators"][0], "x1 + x2 + x3");
    assert_eq!(r["generators"][2], "x1*x2*x3");

    let squares = run(&["describe", "--family", "signed_perm_real", "--n", "2"]);
    let r = stdout_json(&squares)["result"].clone();
    assert_eq!(r["degrees"], serde_json::json!([2, 4]));
    assert_eq!(r["generators"][0], "x1^2 + x2^2");
}

#[test]
fn curve_lift_artifacts_are_byte_identical_across_runs() {
    let args = [
        "lift-curve",
        "--family",
        "symmetric_complex",
        "--n",
        "2",
        "0",
        "-t",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    let v = stdout_json(&first);
    assert_eq!(v["artifact"], "lift_charts");
    assert_eq!(v["result"]["chart_count"], 2);
    for r in v["result"]["residuals"].as_array().unwrap() {
        assert_eq!(r["ok"], true);
    }
}

#[test]
fn job_files_feed_the_same_pipeline_as_flags() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let job = corpus.join("02_s2_square_root_pair.json");
    let from_file = run(&["lift-curve", "--job", job.to_str().unwrap()]);
    let v = stdout_json(&from_file);
    assert_eq!(v["artifact"], "lift_charts");
    assert_eq!(v["result"]["chart_count"], 2);

    let inline = run(&[
        "lift-curve",
        "--family",
        "symmetric_complex",
        "--n",
        "2",
        "0",
        "-t",
    ]);
    assert_eq!(inline.stdout, from_file.stdout);
}

#[test]
fn out_flag_writes_the_artifact_and_keeps_stdout_quiet() {
    let path = scratch("membership.json");
    let out = run(&[
        "check-membership",
        "--family",
        "signed_perm_real",
        "--n",
        "2",
        "--out",
        path.to_str().unwrap(),
        "5",
        "4",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).expect("artifact file");
    std::fs::remove_file(&path).ok();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["result"]["verdict"], "inside");
    assert!(String::from_utf8_lossy(&out.stderr).contains("inside"));
}

#[test]
fn membership_verdicts_share_exit_zero() {
    // Rejection is a verdict in the artifact, not a process failure.
    let outside = run(&[
        "check-membership",
        "--family",
        "signed_perm_real",
        "--n",
        "2",
        "1",
        "1",
    ]);
    assert_eq!(outside.status.code(), Some(0));
    assert_eq!(stdout_json(&outside)["result"]["verdict"], "outside");
}

#[test]
fn csv_is_a_verification_view() {
    let out = run(&[
        "verify-lift",
        "--family",
        "symmetric_complex",
        "--n",
        "2",
        "--nvars",
        "1",
        "--grid-levels",
        "4,5",
        "--format",
        "csv",
        "0",
        "-t",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,f1_re,f1_im,f2_re,f2_im,grad,on_e"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 2);
    for row in rows {
        assert_eq!(row.matches(',').count(), 6, "ragged row {row:?}");
    }

    let refused = run(&[
        "lift-curve",
        "--family",
        "symmetric_complex",
        "--n",
        "2",
        "--format",
        "csv",
        "0",
        "-t",
    ]);
    assert_eq!(refused.status.code(), Some(2));
}

#[test]
fn failures_map_to_distinct_exit_codes() {
    let bad_family = run(&["describe", "--family", "nonsense", "--n", "2"]);
    assert_eq!(bad_family.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_family.stderr).contains("unknown family"));

    let arity = run(&[
        "check-membership",
        "--family",
        "signed_perm_real",
        "--n",
        "2",
        "1",
    ]);
    assert_eq!(arity.status.code(), Some(2));

    // The quartic product needs on the order of a hundred leaves.
    let starved = run(&["resolve", "--budget", "2", "x*y^2 - y^3 - x^4 + x^3*y"]);
    assert_eq!(starved.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&starved.stderr).contains("budget"));
}

#[test]
fn corpus_runs_separate_data_mismatches_from_errors() {
    let dir = scratch("corpus");
    std::fs::create_dir_all(&dir).unwrap();
    let job = serde_json::json!({
        "subcommand": "check-membership",
        "family": "signed_perm_real",
        "n": 2,
        "components": ["5", "4"],
        "expect": {"outcome": "ok", "membership": "inside"},
    });
    std::fs::write(dir.join("inside.json"), job.to_string()).unwrap();
    let pass = run(&["run-corpus", dir.to_str().unwrap()]);
    assert_eq!(pass.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&pass.stdout).contains("PASS"));

    let mut wrong = job;
    wrong["expect"]["membership"] = "outside".into();
    std::fs::write(dir.join("wrong.json"), wrong.to_string()).unwrap();
    let fail = run(&["run-corpus", dir.to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL"));
    std::fs::remove_dir_all(&dir).ok();
}
