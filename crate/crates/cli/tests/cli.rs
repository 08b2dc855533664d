//! End-to-end tests for the `cryptomut` binary: every subcommand, the JSON
//! output mode, and the stage-specific exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EXIT_VALIDATION: i32 = 2;
const EXIT_GENERATION: i32 = 3;
const EXIT_SEEDING: i32 = 4;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cryptomut"))
}

fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/demo")
}

fn broken_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/broken")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_ok(output: &Output) {
    assert_eq!(
        output.status.code(),
        Some(0),
        "stderr: {}",
        stderr_str(output)
    );
}

fn json_stdout(output: &Output) -> Value {
    assert_ok(output);
    serde_json::from_str(&stdout_str(output)).expect("stdout is JSON")
}

/// Copy a fixture tree into `dst` (the CLI must never write into the repo).
fn copy_tree(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for entry in walk(src) {
        let rel = entry.strip_prefix(src).unwrap();
        let to = dst.join(rel);
        std::fs::create_dir_all(to.parent().unwrap()).unwrap();
        std::fs::copy(&entry, &to).unwrap();
    }
}

fn walk(root: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path);
            }
        }
    }
    files
}

// ---------------------------------------------------------------------------
// Inspection commands
// ---------------------------------------------------------------------------

#[test]
fn help_lists_every_subcommand() {
    let output = run(&["--help"]);
    assert_ok(&output);
    let text = stdout_str(&output);
    for name in [
        "taxonomy", "api-model", "generate", "scan", "seed", "check", "minimize", "analyze",
        "run",
    ] {
        assert!(text.contains(name), "--help missing `{name}`:\n{text}");
    }
}

#[test]
fn taxonomy_list_selected_as_json() {
    let output = run(&["taxonomy", "list", "--selected", "--json"]);
    let cases = json_stdout(&output);
    let ids: Vec<&str> = cases
        .as_array()
        .expect("array")
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert!(ids.len() >= 19, "{} selected cases", ids.len());
    assert!(ids.contains(&"des-cipher"));
    assert!(ids.contains(&"trust-all-trustmanager"));
}

#[test]
fn taxonomy_clusters_and_api_model_list() {
    let output = run(&["taxonomy", "clusters", "--json"]);
    let clusters = json_stdout(&output);
    assert_eq!(clusters.as_array().unwrap().len(), 9);

    let output = run(&["api-model", "list", "--json"]);
    let apis = json_stdout(&output);
    assert!(apis
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a == "javax.crypto.Cipher"));
}

#[test]
fn taxonomy_show_unknown_case_is_a_validation_error() {
    let output = run(&["taxonomy", "show", "no-such-case"]);
    assert_eq!(output.status.code(), Some(EXIT_VALIDATION));
    assert!(stderr_str(&output).contains("no-such-case"));
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

#[test]
fn generate_one_pair_as_json() {
    let output = run(&["generate", "--cases", "des-cipher", "--operators", "OP1", "--json"]);
    let mutants = json_stdout(&output);
    let ids: Vec<&str> = mutants
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["des-cipher__OP1__1", "des-cipher__OP1__2", "des-cipher__OP1__3"]);
}

#[test]
fn generate_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mutants.json");
    let output = run(&[
        "generate",
        "--cases",
        "md5-hash",
        "--operators",
        "OP2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ok(&output);
    let parsed: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 1);
}

#[test]
fn generate_inapplicable_pair_is_a_generation_error() {
    // OP7 rewrites overridden method bodies; a string-argument case has none.
    let output = run(&["generate", "--cases", "des-cipher", "--operators", "OP7"]);
    assert_eq!(output.status.code(), Some(EXIT_GENERATION));
}

// ---------------------------------------------------------------------------
// Scan
// ---------------------------------------------------------------------------

#[test]
fn scan_demo_exhaustive_inventory() {
    let demo = demo_dir();
    let output = run(&[
        "scan",
        "--project",
        demo.to_str().unwrap(),
        "--scope",
        "exhaustive",
        "--json",
    ]);
    let locations = json_stdout(&output);
    assert_eq!(locations.as_array().unwrap().len(), 34);
}

#[test]
fn scan_similarity_requires_a_case() {
    let demo = demo_dir();
    let missing = run(&[
        "scan",
        "--project",
        demo.to_str().unwrap(),
        "--scope",
        "similarity",
    ]);
    assert_eq!(missing.status.code(), Some(EXIT_VALIDATION));

    let output = run(&[
        "scan",
        "--project",
        demo.to_str().unwrap(),
        "--scope",
        "similarity",
        "--case",
        "md5-hash",
        "--json",
    ]);
    let locations = json_stdout(&output);
    assert_eq!(locations.as_array().unwrap().len(), 2);
}

// ---------------------------------------------------------------------------
// Seed → check → analyze round trip
// ---------------------------------------------------------------------------

fn sarif_for(findings: &[(&str, usize)]) -> String {
    let results: Vec<Value> = findings
        .iter()
        .map(|(file, line)| {
            serde_json::json!({
                "ruleId": "cli-rule",
                "message": {"text": "alarm"},
                "locations": [{
                    "physicalLocation": {
                        "artifactLocation": {"uri": file},
                        "region": {"startLine": line}
                    }
                }]
            })
        })
        .collect();
    serde_json::json!({
        "version": "2.1.0",
        "runs": [{"tool": {"driver": {"name": "cli-test"}}, "results": results}]
    })
    .to_string()
}

#[test]
fn seed_check_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("seeded");
    let demo = demo_dir();

    // Seed: md5-hash OP2 at both similar-usage sites.
    let output = run(&[
        "seed",
        "--project",
        demo.to_str().unwrap(),
        "--scope",
        "similarity",
        "--cases",
        "md5-hash",
        "--operators",
        "OP2",
        "--out",
        out.to_str().unwrap(),
        "--json",
    ]);
    let summary = json_stdout(&output);
    assert_eq!(summary["records"], 2, "summary: {summary}");
    assert_eq!(summary["skipped"], 0);
    let log = PathBuf::from(summary["log"].as_str().unwrap());
    assert!(log.exists());

    // Check: the seeded copy still parses.
    let copy = out.join("bulk");
    let output = run(&["check", "--copy", copy.to_str().unwrap()]);
    assert_ok(&output);

    // Analyze: a SARIF report hitting the first record kills exactly one.
    let first: Value = serde_json::from_str(
        std::fs::read_to_string(&log)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    let report_path = dir.path().join("report.sarif");
    std::fs::write(
        &report_path,
        sarif_for(&[
            (first["file"].as_str().unwrap(), first["start_line"].as_u64().unwrap() as usize),
            ("src/com/demo/App.java", 9999),
        ]),
    )
    .unwrap();
    let output = run(&[
        "analyze",
        "--log",
        log.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
        "--json",
    ]);
    let verdict = json_stdout(&output);
    assert_eq!(verdict["total_records"], 2);
    assert_eq!(verdict["killed"].as_array().unwrap().len(), 1);
    assert_eq!(verdict["unkilled"].as_array().unwrap().len(), 1);
    assert_eq!(verdict["unmatched_findings"].as_array().unwrap().len(), 1);
    assert_eq!(
        verdict["killed"][0]["record"]["mutant_id"],
        first["mutant_id"]
    );
}

#[test]
fn analyze_accepts_csv_with_column_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("seeded");
    let demo = demo_dir();
    let output = run(&[
        "seed",
        "--project",
        demo.to_str().unwrap(),
        "--scope",
        "similarity",
        "--cases",
        "des-cipher",
        "--operators",
        "OP1",
        "--out",
        out.to_str().unwrap(),
        "--json",
    ]);
    let summary = json_stdout(&output);
    let log = PathBuf::from(summary["log"].as_str().unwrap());
    let first: Value = serde_json::from_str(
        std::fs::read_to_string(&log)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();

    let map_path = dir.path().join("columns.json");
    std::fs::write(
        &map_path,
        r#"{"file": "Path", "line": "Row", "rule": "Rule", "delimiter": ";"}"#,
    )
    .unwrap();
    let report_path = dir.path().join("report.csv");
    std::fs::write(
        &report_path,
        format!(
            "Path;Row;Rule\n{};{};weak-cipher\n",
            first["file"].as_str().unwrap(),
            first["start_line"]
        ),
    )
    .unwrap();

    let output = run(&[
        "analyze",
        "--log",
        log.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
        "--format",
        "csv",
        "--column-map",
        map_path.to_str().unwrap(),
        "--group-by",
        "operator",
        "--json",
    ]);
    let verdict = json_stdout(&output);
    assert_eq!(verdict["killed"].as_array().unwrap().len(), 1);
    let groups = verdict["groups"].as_array().unwrap();
    assert!(groups.iter().any(|g| g["key"] == "OP1" && g["killed"] == 1));
}

#[test]
fn check_flags_a_copy_with_syntax_errors() {
    let broken = broken_dir();
    let output = run(&["check", "--copy", broken.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(EXIT_SEEDING));
    assert!(stderr_str(&output).contains("Bad.java"));
    assert!(stdout_str(&output).contains("1 syntax error(s)"));
}

#[test]
fn seed_refuses_out_inside_project() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("project");
    copy_tree(&demo_dir(), &project);
    let out = project.join("seeded");
    let output = run(&[
        "seed",
        "--project",
        project.to_str().unwrap(),
        "--scope",
        "main",
        "--cases",
        "des-cipher",
        "--operators",
        "OP1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(EXIT_SEEDING));
}

#[test]
fn analyze_with_missing_log_fails() {
    let output = run(&["analyze", "--log", "/no/such/log.jsonl", "--report", "/no/such.sarif"]);
    assert_eq!(output.status.code(), Some(1));
}

// ---------------------------------------------------------------------------
// Minimize
// ---------------------------------------------------------------------------

#[test]
fn minimize_builds_a_checkable_app() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "minimize",
        "--mutant-id",
        "hostname-verifier-true__OP12__1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&output);
    let app = dir.path().join("hostname-verifier-true__OP12__1");
    assert!(app.join("src/com/example/app/App.java").exists());
    let output = run(&["check", "--copy", app.to_str().unwrap()]);
    assert_ok(&output);
}

#[test]
fn minimize_rejects_unknown_mutant_id() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "minimize",
        "--mutant-id",
        "des-cipher__OP1__99",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(EXIT_VALIDATION));
}

// ---------------------------------------------------------------------------
// Run (config-driven pipeline)
// ---------------------------------------------------------------------------

#[test]
fn run_dry_run_then_full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("campaign");
    let demo = demo_dir();
    let config_path = dir.path().join("config.json");
    let log = dir.path().join("mutation.jsonl");
    std::fs::write(
        &config_path,
        serde_json::json!({
            "project": demo.to_str().unwrap(),
            "scope": "main",
            "cases": ["des-cipher", "hostname-verifier-true"],
            "operators": ["OP1", "OP12"],
            "out": out.to_str().unwrap(),
            "log": log.to_str().unwrap()
        })
        .to_string(),
    )
    .unwrap();

    let output = run(&["run", "--config", config_path.to_str().unwrap(), "--dry-run"]);
    assert_ok(&output);
    assert!(!out.exists(), "dry run must not seed");

    let output = run(&["run", "--config", config_path.to_str().unwrap()]);
    assert_ok(&output);
    assert!(log.exists());
    let lines = std::fs::read_to_string(&log).unwrap().lines().count();
    // 3 OP1 variants + 3 OP12 variants, one main-entry location each.
    assert_eq!(lines, 6);
}

#[test]
fn run_with_report_prints_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("campaign");
    let demo = demo_dir();
    let log = dir.path().join("mutation.jsonl");
    let report_path = dir.path().join("report.sarif");
    // An empty report: everything survives, the pipeline still succeeds.
    std::fs::write(&report_path, sarif_for(&[])).unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        serde_json::json!({
            "project": demo.to_str().unwrap(),
            "scope": "main",
            "cases": ["md5-hash"],
            "operators": ["OP1"],
            "out": out.to_str().unwrap(),
            "log": log.to_str().unwrap(),
            "report": report_path.to_str().unwrap()
        })
        .to_string(),
    )
    .unwrap();
    let output = run(&["run", "--config", config_path.to_str().unwrap()]);
    assert_ok(&output);
    let text = stdout_str(&output);
    assert!(text.contains("killed 0/2"), "stdout: {text}");
}

#[test]
fn run_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        r#"{"project": "x", "scope": "main", "out": "y", "tpyo": true}"#,
    )
    .unwrap();
    let output = run(&["run", "--config", config_path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(EXIT_VALIDATION));
    assert!(stderr_str(&output).contains("tpyo"));
}

// ---------------------------------------------------------------------------
// Output hygiene
// ---------------------------------------------------------------------------

#[test]
fn json_mode_keeps_stdout_pure() {
    // Everything informational goes to stderr; stdout must stay parseable
    // even for commands with human-facing chatter.
    let demo = demo_dir();
    let output = run(&[
        "scan",
        "--project",
        demo.to_str().unwrap(),
        "--scope",
        "main",
        "--json",
    ]);
    let value = json_stdout(&output);
    assert!(value.is_array());
}
