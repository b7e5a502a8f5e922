use std::path::Path;
use std::process::{Command, Output};

fn metanorms(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metanorms"))
        .args(args)
        .current_dir(cwd)
        .env_remove("LLM_API_KEY")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn preset_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = metanorms(&["preset", "--combination", "2", "--punishment", "3:1", "--seed", "9", "--out", "cfg.toml"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = metanorms(&["simulate", "--config", "cfg.toml", "--out", "runs"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("status Completed"));
    let run_id = out
        .lines()
        .find_map(|l| l.strip_prefix("run_id "))
        .unwrap()
        .to_string();
    assert!(run_id.ends_with("-s9"));
    let run_dir = d.join("runs").join(&run_id);
    for f in ["events.jsonl", "census.csv", "trend.svg"] {
        assert!(run_dir.join(f).is_file());
    }

    // same config and seed gives the same log
    let o = metanorms(&["simulate", "--config", "cfg.toml", "--out", "again"], d);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(run_dir.join("events.jsonl")).unwrap(),
        std::fs::read(d.join("again").join(&run_id).join("events.jsonl")).unwrap()
    );

    // the report command rebuilds the census table from the log
    let events = run_dir.join("events.jsonl");
    let o = metanorms(&["report", "--events", events.to_str().unwrap(), "--out", "rebuilt"], d);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(run_dir.join("census.csv")).unwrap(),
        std::fs::read(d.join("rebuilt").join("census.csv")).unwrap()
    );
}

#[test]
fn missing_and_invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = metanorms(&["simulate", "--config", "nope.toml"], d);
    assert_eq!(o.status.code(), Some(2));

    let o = metanorms(&["preset", "--combination", "1", "--punishment", "6:1", "--out", "cfg.toml"], d);
    assert!(o.status.success());
    let text = std::fs::read_to_string(d.join("cfg.toml")).unwrap();
    std::fs::write(d.join("bad.toml"), text.replace("iterations = 10", "iterations = 0")).unwrap();
    let o = metanorms(&["simulate", "--config", "bad.toml"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("iterations"));

    std::fs::write(d.join("extra.toml"), format!("{text}\nmystery = 1\n")).unwrap();
    let o = metanorms(&["simulate", "--config", "extra.toml"], d);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn backend_decided_costs_need_a_language_model() {
    let dir = tempfile::tempdir().unwrap();
    let o = metanorms(
        &["replicate", "--combination", "1", "--punishment", "none", "--backend", "oracle", "--seeds", "2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = metanorms(&["replicate", "--combination", "3", "--punishment", "6:1", "--seeds", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = metanorms(&["replicate", "--combination", "1", "--punishment", "2:1", "--seeds", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreachable_llm_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = metanorms(&["preset", "--combination", "1", "--punishment", "6:1", "--out", "cfg.toml"], d);
    assert!(o.status.success());
    let text = std::fs::read_to_string(d.join("cfg.toml")).unwrap();
    // a port nothing listens on, no retries
    let patched = text
        .replace("http://localhost:8000/v1", "http://127.0.0.1:9/v1")
        .replace("transport_retries = 3", "transport_retries = 0");
    assert_ne!(patched, text);
    std::fs::write(d.join("llm.toml"), patched).unwrap();
    let o = metanorms(&["simulate", "--config", "llm.toml", "--backend", "llm", "--out", "runs"], d);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn replicate_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("seeds.txt"), "# seeds\n4\n8\n15\n").unwrap();
    let o = metanorms(
        &["replicate", "--combination", "1", "--punishment", "6:1", "--seed-list", "seeds.txt", "--out", "batch", "--jobs", "2"],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(d.join("batch/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.lines().nth(1).unwrap().starts_with("4,"));
    let aggregate = std::fs::read_to_string(d.join("batch/aggregate.csv")).unwrap();
    assert!(aggregate.contains("runs,all,3"));
}

#[test]
fn eval_backend_scores_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = metanorms(&["eval-backend", "--backend", "oracle", "--out", "acc.csv"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("accuracy 1.0000 (60/60)"));
    let csv = std::fs::read_to_string(dir.path().join("acc.csv")).unwrap();
    assert!(csv.starts_with("dimension,key,matched,total,accuracy\n"));
}
