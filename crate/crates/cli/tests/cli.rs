use std::path::Path;
use std::process::{Command, Output};

fn hypercol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercol")).args(args).output().expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn thresholds_to_stdout() {
    let out = hypercol(&["thresholds", "--q", "3,4", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# hypercol thresholds schema=1"));
    assert!(text.contains("lambda_r"));
}

#[test]
fn output_is_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "1", "3"].iter().enumerate() {
        let path = dir.path().join(format!("core{i}.csv"));
        let out = hypercol(&[
            "core", "--c", "8,12", "--n", "2000", "--trials", "6", "--seed", "11", "--workers", workers,
            "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let summary = dir.path().join(format!("core{i}.summary.csv"));
        outputs.push((read(&path), read(&summary)));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[0].0.lines().filter(|l| !l.starts_with('#')).count(), 1 + 12);
}

#[test]
fn json_output_carries_version_and_config() {
    let out = hypercol(&["cycles", "--n", "500", "--c", "0.5", "--trials", "100", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["config"]["trials"], 100);
    assert_eq!(v["records"].as_array().unwrap().len(), 100);
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(hypercol(&["core", "--q", "", "--n", "100"]).status.code(), Some(2));
    assert_eq!(hypercol(&["core"]).status.code(), Some(2), "missing n");
    assert_eq!(hypercol(&["core", "--n", "100", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(hypercol(&["cycles", "--n", "100", "--trials", "5"]).status.code(), Some(2));
    assert_eq!(hypercol(&["thresholds", "--q", "2"]).status.code(), Some(2));
}

#[test]
fn resource_guard_exits_3() {
    let out = hypercol(&["core", "--n", "1000", "--trials", "4", "--max-work", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("hypercol:"));
    assert_eq!(hypercol(&["oracle", "--n", "60", "--m", "10"]).status.code(), Some(3));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"trials": 3, "n": 300}"#).unwrap();
    let out = hypercol(&["core", "--n", "100", "--trials", "9", "--format", "json", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["trials"], 3);
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(records[0]["n"], 300);

    std::fs::write(&cfg, r#"{"no_such_key": 1}"#).unwrap();
    assert_eq!(hypercol(&["core", "--n", "100", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, "not json").unwrap();
    assert_eq!(hypercol(&["core", "--n", "100", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn records_replay_from_their_seed() {
    let all = hypercol(&["core", "--c", "11", "--n", "3000", "--trials", "4", "--seed", "20", "--format", "json"]);
    let one = hypercol(&["core", "--c", "11", "--n", "3000", "--trials", "1", "--seed", "22", "--format", "json"]);
    let all: serde_json::Value = serde_json::from_slice(&all.stdout).unwrap();
    let one: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(all["records"][2], one["records"][0]);
}
