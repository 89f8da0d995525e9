use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn riot(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riot"))
        .args(args)
        .current_dir(dir)
        .env_remove("RIOT_CATALOG")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = riot(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn workspace() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    ok(&path, &["gen", "montage-like", "20", "--seed", "1", "--out", "wf.json"]);
    (dir, path)
}

const FAST: &[&str] = &["--n-random", "40", "--eta-grid", "0.3,0.6,0.9"];

fn schedule(dir: &Path, out: &str, extra: &[&str]) -> String {
    let mut args = vec!["schedule", "wf.json", "--seed", "7", "--out", out];
    args.extend_from_slice(FAST);
    args.extend_from_slice(extra);
    ok(dir, &args)
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn same_seed_gives_byte_identical_frontiers() {
    let (_tmp, dir) = workspace();
    schedule(&dir, "a", &[]);
    schedule(&dir, "b", &[]);
    let csv = |n: &str| std::fs::read(dir.join(n)).unwrap();
    assert_eq!(csv("a.csv"), csv("b.csv"));
    assert!(String::from_utf8(csv("a.csv")).unwrap().starts_with("makespan_s,cost_usd,n_vms,eta,provenance,mapping\n"));
}

#[test]
fn summary_line_reports_frontier_and_budget() {
    let (_tmp, dir) = workspace();
    let line = schedule(&dir, "f", &[]);
    for key in ["points=", "best_makespan_s=", "best_cost_usd=", "simulations=", "wall_time_s="] {
        assert!(line.contains(key), "missing {key} in {line}");
    }
}

#[test]
fn missing_input_exits_with_code_two() {
    let (_tmp, dir) = workspace();
    let out = riot(&dir, &["schedule", "nope.json", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));
}

#[test]
fn simulate_reproduces_frontier_objectives() {
    let (_tmp, dir) = workspace();
    schedule(&dir, "f", &[]);
    let frontier = read_json(dir.join("f.json"));
    let points = frontier["points"].as_array().unwrap();
    for (i, p) in points.iter().enumerate() {
        let idx = i.to_string();
        ok(&dir, &["simulate", "wf.json", "f.json", "--point", &idx, "--out", "ev.json"]);
        let ev = read_json(dir.join("ev.json"));
        assert_eq!(ev["makespan"], p["makespan_s"]);
        assert_eq!(ev["cost"], p["cost_usd"]);
    }
}

#[test]
fn unknown_task_in_schedule_is_an_input_error() {
    let (_tmp, dir) = workspace();
    schedule(&dir, "f", &[]);
    let mut doc = read_json(dir.join("f.json"))["points"][0]["schedule"].clone();
    let text = serde_json::to_string(&doc).unwrap().replace("\"t0003\"", "\"ghost\"");
    doc = serde_json::from_str(&text).unwrap();
    std::fs::write(dir.join("bad.json"), serde_json::to_string(&doc).unwrap()).unwrap();
    let out = riot(&dir, &["simulate", "wf.json", "bad.json"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn comparing_a_frontier_with_itself() {
    let (_tmp, dir) = workspace();
    schedule(&dir, "f", &[]);
    ok(&dir, &["compare", "f.json", "f.csv", "--out", "cmp.json"]);
    let report = read_json(dir.join("cmp.json"));
    let inputs = report["inputs"].as_array().unwrap();
    assert_eq!(inputs[0]["hypervolume"], inputs[1]["hypervolume"]);
    for i in inputs {
        assert_eq!(i["igd"].as_f64(), Some(0.0));
    }
}

#[test]
fn single_point_frontier_has_no_spread() {
    let (_tmp, dir) = workspace();
    ok(&dir, &["schedule", "wf.json", "--algo", "heft", "--seed", "1", "--out", "h"]);
    schedule(&dir, "f", &[]);
    let table = ok(&dir, &["compare", "f.json", "h.json"]);
    let heft_row = table.lines().find(|l| l.starts_with("h.json")).unwrap();
    assert!(heft_row.trim_end().ends_with("n.a."), "{heft_row}");
}

#[test]
fn flags_override_config_file() {
    let (_tmp, dir) = workspace();
    std::fs::write(dir.join("cfg.toml"), "algo = \"random\"\nbudget = 5\nseed = 99\n").unwrap();
    let line = ok(&dir, &["schedule", "wf.json", "--config", "cfg.toml", "--budget", "9", "--out", "r"]);
    assert!(line.contains("simulations=9"), "{line}");
    let meta = &read_json(dir.join("r.json"))["meta"];
    assert_eq!(meta["algorithm"], "random");
    assert_eq!(meta["seed"], 99);

    std::fs::write(dir.join("bad.toml"), "bogus_key = 1\n").unwrap();
    assert_eq!(riot(&dir, &["schedule", "wf.json", "--config", "bad.toml"]).status.code(), Some(2));
}

#[test]
fn dax_input_is_accepted() {
    let (_tmp, dir) = workspace();
    let dax = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/montage_25.dax");
    let line = ok(&dir, &["schedule", dax, "--algo", "heft", "--seed", "1"]);
    assert!(line.contains("makespan_s") || line.contains("makespan"), "{line}");
}
