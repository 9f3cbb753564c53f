use std::path::Path;
use std::process::{Command, Output};

use ladder_core::dataset::{read_jsonl, write_jsonl, QuestionRecord};

fn ladder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ladder")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn answer_worked_confounding() {
    let out = ladder(&["answer", "--graph", "confounding", "--query", "ate", "--params", &data("conf_a.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("value     0.4000"), "{text}");
    assert!(text.contains("answer    Yes"), "{text}");
}

#[test]
fn answer_decrease_flips() {
    let out = ladder(&[
        "answer", "--graph", "confounding", "--query", "ate", "--params", &data("conf_a.json"), "--direction", "decrease",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("answer    No"), "{text}");
}

#[test]
fn generate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for (f, threads) in [(&a, "1"), (&b, "4")] {
        let out = ladder(&["generate", "--size", "120", "--seed", "42", "--threads", threads, "--out", path(f)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.jsonl");
    assert_eq!(ladder(&["generate", "--size", "60", "--seed", "5", "--out", path(&f)]).status.code(), Some(0));
    assert_eq!(ladder(&["verify", "--in", path(&f)]).status.code(), Some(0));

    let mut records: Vec<QuestionRecord> = read_jsonl(&f).unwrap();
    records[7].answer = records[7].answer.flip();
    let bad = dir.path().join("bad.jsonl");
    write_jsonl(&records, &bad).unwrap();
    let out = ladder(&["verify", "--in", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains(&records[7].id));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(ladder(&["generate", "--bogus"]).status.code(), Some(1));
    assert_eq!(ladder(&["generate", "--out", "x.jsonl"]).status.code(), Some(1));
    assert_eq!(ladder(&["verify", "--in", "/nonexistent/file.jsonl"]).status.code(), Some(1));
    assert_eq!(ladder(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"size": 30, "seed": 1, "alignment_mix": [1.0, 0.0, 0.0]}"#).unwrap();
    let f = dir.path().join("d.jsonl");
    let out = ladder(&["generate", "--config", path(&cfg), "--seed", "9", "--out", path(&f)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records: Vec<QuestionRecord> = read_jsonl(&f).unwrap();
    assert_eq!(records.len(), 30);
    assert!(records.iter().all(|r| r.meta.seed == 9 && r.alignment.as_str() == "commonsensical"));

    std::fs::write(&cfg, r#"{"sise": 30}"#).unwrap();
    assert_eq!(ladder(&["generate", "--config", path(&cfg), "--seed", "9", "--out", path(&f)]).status.code(), Some(1));
}

#[test]
fn stats_json_counts() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.jsonl");
    ladder(&["generate", "--size", "50", "--seed", "2", "--out", path(&f)]);
    let out = ladder(&["stats", "--in", path(&f), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["total"], 50);
}

#[test]
fn prompts_offline_and_eval_with_mock() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.jsonl");
    ladder(&["generate", "--size", "40", "--seed", "6", "--out", path(&f)]);
    let p = dir.path().join("p.jsonl");
    let out = ladder(&["prompts", "--in", path(&f), "--out", path(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let chains: Vec<serde_json::Value> = read_jsonl(&p).unwrap();
    assert_eq!(chains.len(), 40);
    assert_eq!(chains[0]["subquestions"].as_array().unwrap().len(), 5);

    let report = dir.path().join("r.json");
    let out = ladder(&["eval", "--in", path(&f), "--mock", "oracle", "--report", path(&report)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("100.00 overall"));
}

#[test]
fn eval_without_endpoint_fails() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d.jsonl");
    ladder(&["generate", "--size", "5", "--seed", "6", "--out", path(&f)]);
    let out = Command::new(env!("CARGO_BIN_EXE_ladder"))
        .args(["eval", "--in", path(&f)])
        .env_remove("LADDER_ENDPOINT")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
