//! End-to-end tests of the `vids` binary: subcommand flows, exit codes, and
//! the JSON output contract.

use std::path::Path;
use std::process::{Command, Output};

fn vids(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vids"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn scorecard_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/scorecards")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn validate_full_fixture_exits_zero_with_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let out = vids(
        &["scaffold", "fix", "--subjects", "3", "--profile", "full", "--seed", "11"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "scaffold failed: {out:?}");

    let out = vids(&["validate", "fix", "--profile", "full"], dir.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(
        text.lines().last().unwrap().trim(),
        "VALIDATION PASSED (21/21 rules)"
    );
}

#[test]
fn validate_broken_fixture_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    vids(
        &["scaffold", "fix", "--subjects", "2", "--profile", "full"],
        dir.path(),
    );
    let out = vids(
        &["mutate", "fix", "broken", "--rule", "S002"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "mutate failed: {out:?}");

    let out = vids(&["validate", "broken", "--profile", "full"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("VALIDATION FAILED"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = vids(&["validate", "x", "--profile", "bogus"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let out = vids(&["mutate", "a", "b", "--rule", "Z999"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn operational_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = vids(&["validate", "no-such-dataset"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn json_outputs_are_single_documents() {
    let dir = tempfile::tempdir().unwrap();
    vids(
        &["scaffold", "fix", "--subjects", "2", "--profile", "full"],
        dir.path(),
    );

    let out = vids(&["validate", "fix", "--json"], dir.path());
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("one JSON doc");
    assert_eq!(report["Summary"]["Status"], "PASS");
    assert_eq!(report["Results"].as_array().unwrap().len(), 21);

    let out = vids(
        &["score", &scorecard_path("brats.json"), "--json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let score: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("one JSON doc");
    assert_eq!(score["Total"], 8.5);
    assert_eq!(score["Percent"], 39);

    let out = vids(
        &["export", "fix", "flat-out", "--layout", "flat", "--json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let manifest: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("one JSON doc");
    assert_eq!(manifest["Layout"], "flat");
    assert_eq!(manifest["Entries"].as_array().unwrap().len(), 2);
}

#[test]
fn score_prints_table_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = vids(&["score", &scorecard_path("lidc-idri.json")], dir.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("Total         6.0/22 (27%)"), "got: {text}");
}

#[test]
fn splits_and_quality_subcommands_extend_a_dataset() {
    let dir = tempfile::tempdir().unwrap();
    vids(
        &["scaffold", "fix", "--subjects", "4", "--profile", "full", "--seed", "3"],
        dir.path(),
    );
    // Regenerate splits with a different seed.
    let out = vids(
        &["splits", "fix", "--seed", "9", "--ratios", "0.5,0.25,0.25", "--json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let spec: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(spec["Seed"], 9);
    assert_eq!(spec["Train"].as_array().unwrap().len(), 2);

    // Recompute agreement from the per-reader masks.
    let out = vids(&["quality", "fix", "--json"], dir.path());
    assert_eq!(code(&out), 0, "quality failed: {out:?}");
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["PerSubject"].as_array().unwrap().len(), 4);

    // Dataset still validates Full after both rewrites.
    let out = vids(&["validate", "fix"], dir.path());
    assert_eq!(code(&out), 0);
}
