use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn bddl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bddl"))
        .args(args)
        .env_remove("ENGINE_CONFIG")
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap()
}

fn path(rel: &str) -> String {
    data().join(rel).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn validate_corpus_passes() {
    let o = bddl(&["validate", &path("activities")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json_lines(&o).len(), 10);
}

#[test]
fn validate_names_the_broken_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.bddl");
    std::fs::write(&bad, "(define (problem p)\n  (:domain d)\n  (:objects a - b\n").unwrap();
    let good = path("activities/packing_toys/problem0.bddl");
    let o = bddl(&["validate", &good, bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("broken.bddl:4:1"), "{err}");
    assert!(!err.contains("packing_toys"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bddl(&["validate"]).status.code(), Some(2));
    assert_eq!(bddl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bddl(&["bench", "--frames", "many"]).status.code(), Some(2));
}

#[test]
fn classify_summaries() {
    let o = bddl(&["classify", &path("activities")]);
    assert_eq!(o.status.code(), Some(0));
    let lines = json_lines(&o);
    assert_eq!(lines.last().unwrap()["summary"], "6 of 10 kinematic-only");
    let cooked = lines.iter().find(|l| l["activity"] == "cooking_dinner-0").unwrap();
    assert_eq!(cooked["unsupported_predicates"], serde_json::json!(["cooked"]));

    let one = bddl(&["classify", &path("activities/storing_food/problem0.bddl")]);
    assert_eq!(json_lines(&one).last().unwrap()["summary"], "1 of 1 kinematic-only");

    let narrowed = bddl(&["classify", "--supported", "ontop,inside,onfloor", &path("activities")]);
    assert_eq!(json_lines(&narrowed).last().unwrap()["summary"], "3 of 10 kinematic-only");
}

#[test]
fn classify_counts_parse_failures_as_non_kinematic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.bddl"), "(define").unwrap();
    let o = bddl(&["classify", dir.path().to_str().unwrap(), &path("activities/packing_toys")]);
    assert_eq!(o.status.code(), Some(0));
    let lines = json_lines(&o);
    assert!(lines[0]["parse_error"].is_string());
    assert_eq!(lines.last().unwrap()["summary"], "1 of 2 kinematic-only");
}

#[test]
fn sample_then_evaluate_init() {
    let dir = tempfile::tempdir().unwrap();
    let (scene, scope) = (dir.path().join("scene.json"), dir.path().join("scope.json"));
    let cfg = path("engine.toml");
    let act = path("activities/setting_table/problem0.bddl");
    let o = bddl(&[
        "--config", &cfg, "sample", "--activity", &act, "--scene", &path("scenes/apartment.json"), "--seed", "4",
        "--out-scene", scene.to_str().unwrap(), "--out-scope", scope.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let e = bddl(&[
        "--config", &cfg, "evaluate", "--init", "--activity", &act, "--scene", scene.to_str().unwrap(), "--scope",
        scope.to_str().unwrap(),
    ]);
    assert_eq!(e.status.code(), Some(0), "{}", stderr(&e));
    assert_eq!(json_lines(&e)[0]["q_score"], 1.0);
    let g = bddl(&[
        "--config", &cfg, "evaluate", "--activity", &act, "--scene", scene.to_str().unwrap(), "--scope",
        scope.to_str().unwrap(),
    ]);
    assert_eq!(json_lines(&g)[0]["satisfied"], false);
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let args = [
        "sample", "--activity", &path("activities/storing_food/problem0.bddl"), "--scene", &path("scenes/apartment.json"),
        "--out-scene", &out("s.json"), "--out-scope", &out("b.json"),
    ];
    let without = bddl(&args);
    assert_eq!(without.status.code(), Some(1));
    assert!(stderr(&without).contains("taxonomy_path"));
    let with = Command::new(env!("CARGO_BIN_EXE_bddl"))
        .args(args)
        .env("ENGINE_CONFIG", path("engine.toml"))
        .output()
        .unwrap();
    assert_eq!(with.status.code(), Some(0), "{}", stderr(&with));
}

#[test]
fn sampling_failure_is_a_domain_error() {
    let o = bddl(&[
        "--config", &path("engine.toml"), "sample", "--activity", &path("activities/cleaning_table/problem0.bddl"),
        "--scene", &path("scenes/apartment.json"), "--out-scene", "/dev/null", "--out-scope", "/dev/null",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot sample init literal (dusty table.n.02_1)"), "{}", stderr(&o));
}

fn replay(trajectory: &str) -> Output {
    bddl(&[
        "--config", &path("engine.toml"), "replay",
        "--activity", &path("activities/tidying_bedroom/problem0.bddl"),
        "--scene", &path("episodes/tidying_bedroom/scene.json"),
        "--scope", &path("episodes/tidying_bedroom/scope.json"),
        "--trajectory", trajectory,
    ])
}

#[test]
fn replay_unknown_id_names_id_and_frame() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.jsonl");
    let src = std::fs::read_to_string(path("episodes/tidying_bedroom/trajectory.jsonl")).unwrap();
    let lines: Vec<&str> = src.lines().take(3).collect();
    let bad = lines[2].replace("book.n.02_1", "ghost_9");
    std::fs::write(&t, format!("{}\n{}\n{}\n", lines[0], lines[1], bad)).unwrap();
    let o = replay(t.to_str().unwrap());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("ghost_9") && err.contains("frame 2"), "{err}");
}

#[test]
fn reruns_are_byte_identical() {
    let traj = path("episodes/tidying_bedroom/trajectory.jsonl");
    assert_eq!(replay(&traj).stdout, replay(&traj).stdout);
    let c = || bddl(&["classify", &path("activities")]).stdout;
    assert_eq!(c(), c());
}

#[test]
fn stats_table_and_markdown() {
    let o = bddl(&["stats", &path("manifest.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows[0], ["Asset", "Apt.", "Rm.", "Cat.", "Obj.", "A.O."]);
    let md = stdout(&bddl(&["stats", "--markdown", &path("manifest.json")]));
    assert!(md.contains("| ReplicaCAD | 1 | 1 | 41 | 1201 | 8 |"), "{md}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("m.json");
    std::fs::write(&bad, "[{\"asset_name\": \"x\"}]").unwrap();
    let e = bddl(&["stats", bad.to_str().unwrap()]);
    assert_eq!(e.status.code(), Some(1));
    assert!(stderr(&e).contains("malformed manifest"));
}

#[test]
fn bench_writes_report_and_speedups() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = bddl(&[
        "bench", "--workers", "1,2", "--frames", "50", "--seed", "1", "--tables", "4", "--json-out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("workers"));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["rows"].as_array().unwrap().len(), 2);
    assert_eq!(r["rows"][0]["checksum"], r["rows"][1]["checksum"]);

    let again = bddl(&[
        "bench", "--workers", "1,2", "--frames", "50", "--seed", "1", "--tables", "4", "--baseline",
        report.to_str().unwrap(),
    ]);
    assert!(stdout(&again).contains("speedup"), "{}", stdout(&again));
    let mismatched = bddl(&["bench", "--workers", "1", "--frames", "5", "--tables", "4", "--baseline", report.to_str().unwrap()]);
    assert_eq!(mismatched.status.code(), Some(1));
}
