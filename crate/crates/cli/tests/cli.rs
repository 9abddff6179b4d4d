use std::process::{Command, Output};

fn qosketch(dir: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qosketch"))
        .current_dir(dir)
        .env_remove("QOSKETCH_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--model", "er", "--n", "50", "--p", "0.1", "--seed", "3"];
    let a = stdout(&qosketch(dir.path(), &args));
    let b = stdout(&qosketch(dir.path(), &args));
    assert_eq!(a, b);
    assert!(!a.is_empty());
    let c = stdout(&qosketch(dir.path(), &["gen", "--model", "er", "--n", "50", "--p", "0.1", "--seed", "4"]));
    assert_ne!(a, c);
}

#[test]
fn estimate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&qosketch(dir.path(), &["gen", "--model", "ba", "--n", "100", "--m", "3", "--out", "g.tsv"]));
    let csv = stdout(&qosketch(
        dir.path(),
        &["estimate", "--graph", "g.tsv", "--random", "5", "--hops", "1", "--dim", "64", "--exact"],
    ));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("u,v,p,q,estimate,exact"));
    assert!(lines.count() >= 5);
}

#[test]
fn probe_reports_z() {
    let dir = tempfile::tempdir().unwrap();
    let json = stdout(&qosketch(dir.path(), &["probe", "--kind", "gcn", "--trials", "200"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["z"].as_f64().is_some());
    assert!(v["closed_form"].as_f64().unwrap() > 0.0);
}

#[test]
fn split_then_heuristic_eval() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&qosketch(dir.path(), &["gen", "--model", "ba", "--n", "200", "--m", "3", "--out", "g.tsv"]));
    stdout(&qosketch(dir.path(), &["split", "--graph", "g.tsv", "--out", "s"]));
    let json = stdout(&qosketch(dir.path(), &["eval", "--split", "s", "--heuristic", "cn", "--k", "10"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let hits = v["hits"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&hits));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qosketch(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(qosketch(dir.path(), &["gen", "--model", "nope"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = qosketch(dir.path(), &["estimate", "--graph", "missing.tsv", "--random", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = qosketch(dir.path(), &["gen", "--model", "er", "--n", "10", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}
