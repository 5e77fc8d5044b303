//! Behavior of the installed binary: exit codes, output channels, and the
//! equivalence of the two output formats.

use std::path::PathBuf;
use std::process::{Command, Output};

use reltrace::{run, Command as Cmd, Flags, Format};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(format!(
        "{}/../../fixtures/{name}.json",
        env!("CARGO_MANIFEST_DIR")
    ))
}

fn reltrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reltrace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn successful_analysis_exits_zero() {
    let out = reltrace(&["all", fixture("ex51_solidtorus").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("augmentation: -4"));
    assert!(text.contains("conclusion: not-deformable"));
    // Timing information goes to stderr, never into the report.
    assert!(!text.contains("completed in"));
    assert!(stderr(&out).contains("completed in"));
}

#[test]
fn invalid_input_exits_one() {
    let out = reltrace(&["check", fixture("bad_pair").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("face-closure violated"));
    assert!(stdout(&out).contains("valid: false"));
    let out = reltrace(&["nielsen", fixture("bad_pair").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("face-closure violated"));
    let out = reltrace(&["all", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn check_accepts_a_valid_pair() {
    let out = reltrace(&["check", fixture("circle_arc_identity").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("valid: true"));
}

#[test]
fn computation_failure_exits_two() {
    let out = reltrace(&["all", fixture("klein_derive").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("computation failed"));
    assert!(stderr(&out).contains("torsion"));
}

#[test]
fn inconclusive_deformable_exits_three_with_report() {
    for name in ["rotation_circle", "klein_identity"] {
        let out = reltrace(&["deformable", fixture(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(3), "{name}");
        // The trace is still reported in full.
        let text = stdout(&out);
        assert!(text.contains("reidemeister"), "{name}");
        assert!(text.contains("conclusion:"), "{name}");
    }
    // Every other command treats the same documents as plain successes.
    let out = reltrace(&["all", fixture("rotation_circle").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    // And a conclusive verdict exits zero even under `deformable`.
    let out = reltrace(&["deformable", fixture("sphere_pair_identity").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("conclusion: deformable"));
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let path = fixture("ex52_torus");
    let first = reltrace(&["all", path.to_str().unwrap(), "--format", "json"]);
    let second = reltrace(&["all", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let value: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(value["nielsen"]["on_A"], 3);
    assert_eq!(value["nielsen"]["relative"], 6);
    assert_eq!(value["verdict"]["conclusion"], "not-deformable");
}

#[test]
fn text_and_json_carry_the_same_data() {
    let path = fixture("ex51_solidtorus");
    let json_out = reltrace(&["all", path.to_str().unwrap(), "--format", "json"]);
    let text_out = reltrace(&["all", path.to_str().unwrap()]);
    let value: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    let text = stdout(&text_out);
    // Spot-check that every JSON section surfaces in the text rendering.
    assert_eq!(value["lefschetz"]["A"][0][1], -4);
    assert!(text.contains("A A0: -4"));
    assert_eq!(value["nielsen"]["shared"], 2);
    assert!(text.contains("shared: 2"));
    let classes: Vec<&str> = value["reidemeister"]["B_parts"][0]["shadow"]["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(classes, ["1", "b"]);
    assert!(text.contains("classes: 1, b"));
    assert_eq!(
        value["verdict"]["conclusion"].as_str().unwrap(),
        "not-deformable"
    );
    assert!(text.contains("conclusion: not-deformable"));
}

#[test]
fn command_sections_match_the_request() {
    let path = fixture("ex51_solidtorus");
    let out = reltrace(&["lefschetz", path.to_str().unwrap(), "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value.get("lefschetz").is_some());
    assert!(value.get("reidemeister").is_none());
    assert!(value.get("nielsen").is_none());
    let out = reltrace(&["reidemeister", path.to_str().unwrap(), "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value.get("lefschetz").is_none());
    assert!(value.get("reidemeister").is_some());
    let out = reltrace(&["deformable", path.to_str().unwrap(), "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value.get("verdict").is_some());
    assert!(value.get("reidemeister").is_some());
}

#[test]
fn flags_are_honored() {
    let path = fixture("circle_arc_identity");
    let out = reltrace(&["all", path.to_str().unwrap(), "--no-crosscheck", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let skipped = value["consistency"]["skipped"].as_array().unwrap();
    assert!(!skipped.is_empty());
    let out = reltrace(&[
        "all",
        path.to_str().unwrap(),
        "--bounded-conjugacy",
        "3",
        "--format",
        "json",
    ]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value["bounded_conjugacy"].as_array().is_some());
    let out = reltrace(&["all", path.to_str().unwrap(), "--tree", "v2,v1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = reltrace(&["all", path.to_str().unwrap(), "--tree", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown vertex"));
    let out = reltrace(&["all", path.to_str().unwrap(), "--tier", "cw"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn library_run_matches_binary_behavior() {
    let text = std::fs::read_to_string(fixture("rotation_circle")).unwrap();
    let out = run(Cmd::Deformable, &text, &Flags::default());
    assert_eq!(out.exit_code, 3);
    assert!(out.stdout.contains("trace-zero-but-hypotheses-unverified"));
    let out = run(
        Cmd::All,
        &text,
        &Flags { format: Format::Json, ..Flags::default() },
    );
    assert_eq!(out.exit_code, 0);
    serde_json::from_str::<serde_json::Value>(&out.stdout).unwrap();
    let out = run(Cmd::All, "{\"tier\": \"simplicial\"}", &Flags::default());
    assert_eq!(out.exit_code, 1);
    let out = run(Cmd::All, "not json", &Flags::default());
    assert_eq!(out.exit_code, 1);
    assert!(out.stderr.contains("schema"));
}
