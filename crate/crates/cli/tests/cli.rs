use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_polymatrix"))
        .args(args)
        .output()
        .expect("binary runs");
    let code = out.status.code().expect("exit code");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (code, value)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn matching_pennies() -> Value {
    json!({"n": 2, "actions": [2, 2], "edges": [{"u": 0, "v": 1,
        "payoffs_u": [[1.0, 0.0], [0.0, 1.0]],
        "payoffs_v": [[0.0, 1.0], [1.0, 0.0]]}]})
}

#[test]
fn generate_single_clause() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.txt", "p m13sat 3 1\n1 2 3 0\n");
    let (code, v) = run(&["generate", s(&f), "--kind", "G", "--no-meta"]);
    assert_eq!(code, 0);
    assert_eq!(v["label"], "YES");
    assert_eq!(v["game"]["n"], 4);
    assert_eq!(v["strategy_names"][3], json!(["1", "2", "3"]));
}

#[test]
fn generate_gprime_constants_and_gtilde_names() {
    let dir = TempDir::new().unwrap();
    // every assignment makes one of these clauses fail
    let f = write(&dir, "f.txt", "p m13sat 4 4\n1 2 3 0\n1 2 4 0\n1 3 4 0\n2 3 4 0\n");
    let (code, v) = run(&["generate", s(&f), "--kind", "Gprime", "--eps", "0.5", "--no-meta"]);
    assert_eq!(code, 0);
    assert_eq!(v["label"], "NO");
    assert_eq!(v["constants"]["c"], "5/8");
    assert_eq!(v["constants"]["kappa"], "2/9");

    let (code, v) = run(&["generate", s(&f), "--kind", "Gtilde", "--eps", "1/2", "--no-meta"]);
    assert_eq!(code, 0);
    let clause = v["strategy_names"][4].as_array().unwrap();
    assert_eq!(clause.len(), 7);
    assert_eq!(clause[3], "Out");

    let (code, _) = run(&["generate", s(&f), "--kind", "Gprime"]);
    assert_eq!(code, 1);
}

#[test]
fn solve_edgeless_game() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &json!({"n": 3, "actions": [2, 3, 1], "edges": []}).to_string());
    let (code, v) = run(&["solve", s(&g), "--eps", "0.5", "--k", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "solved");
    assert_eq!(v["max_regret"], 0.0);
    assert!(v["meta"]["runtime_ms"].is_number());
}

#[test]
fn solve_path_welfare_reaches_oracle_optimum() {
    let dir = TempDir::new().unwrap();
    let (_, game) = run(&["random", "--players", "5", "--max-actions", "2", "--seed", "3", "--no-meta"]);
    let g = write(&dir, "g.json", &game.to_string());
    let (code, v) = run(&[
        "solve", s(&g), "--eps", "0.4", "--k", "1", "--constraint", r#"{"problem": 1, "param": 1.0}"#,
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["within_bound"], true);
    let (_, o) = run(&["oracle", "pure", s(&g), "--eps", "0", "--no-meta"]);
    let hits = o["profiles"].as_array().unwrap();
    assert!(!hits.is_empty());
    let mut best = f64::NEG_INFINITY;
    for (i, h) in hits.iter().enumerate() {
        let p = write(&dir, &format!("hit{i}.json"), &h.to_string());
        let (_, r) = run(&["verify", s(&g), s(&p), "--eps", "0", "--no-meta"]);
        best = best.max(r["reports"][0]["welfare"].as_f64().unwrap());
    }
    assert!(v["objective"]["value"].as_f64().unwrap() >= best - 1e-9);
}

#[test]
fn explicit_decomposition_matches_auto() {
    let dir = TempDir::new().unwrap();
    let edges: Vec<Value> = (1..4)
        .map(|v| {
            json!({"u": 0, "v": v,
                   "payoffs_u": [[1.0, 0.0], [0.0, 1.0]],
                   "payoffs_v": [[1.0, 0.0], [0.0, 1.0]]})
        })
        .collect();
    let game = json!({"n": 4, "actions": [2, 2, 2, 2], "edges": edges});
    let g = write(&dir, "g.json", &game.to_string());
    let td = write(&dir, "star.td", "s td 3 2 4\nb 1 1 2\nb 2 1 3\nb 3 1 4\n1 2\n1 3\n");
    let (c1, a) = run(&["solve", s(&g), "--eps", "0.5", "--k", "2", "--no-meta"]);
    let (c2, b) = run(&["solve", s(&g), "--td", s(&td), "--eps", "0.5", "--k", "2", "--no-meta"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a["max_regret"], b["max_regret"]);
    assert!(a["max_regret"].as_f64().unwrap() <= 0.75);
    assert!(a.get("meta").is_none());
}

#[test]
fn solve_reports_certified_empty() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &matching_pennies().to_string());
    let (code, v) = run(&["solve", s(&g), "--eps", "0.1", "--k", "1", "--no-meta"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "empty");
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &matching_pennies().to_string());
    let mixed = write(&dir, "mixed.json", "[[0.5, 0.5], [0.5, 0.5]]");
    let pure = write(&dir, "pure.json", r#"{"profile": [[1.0, 0.0], [1.0, 0.0]]}"#);
    let (code, v) = run(&["verify", s(&g), s(&mixed), "--eps", "0", "--no-meta"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    let (code, v) = run(&["verify", s(&g), s(&pure), "--eps", "0.5", "--mode", "wsne", "--no-meta"]);
    assert_eq!(code, 3);
    assert_eq!(v["reports"][0]["max_regret"], 1.0);
    let (code, _) = run(&["verify", s(&g), s(&dir.path().join("missing.json")), "--eps", "0"]);
    assert_eq!(code, 1);
}

#[test]
fn oracle_pure_on_matching_pennies_is_empty() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &matching_pennies().to_string());
    let (code, v) = run(&["oracle", "pure", s(&g), "--eps", "0.5", "--no-meta"]);
    assert_eq!(code, 0);
    assert_eq!(v["count"], 0);
    let (_, v) = run(&["oracle", "kuniform", s(&g), "--k", "2", "--eps", "0", "--no-meta"]);
    assert_eq!(v["count"], 1);
    let (_, v) = run(&["oracle", "grid", s(&g), "--eps", "0", "--grid-step", "0.5", "--no-meta"]);
    assert_eq!(v["count"], 1);
}

#[test]
fn sampling_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &matching_pennies().to_string());
    let args = ["oracle", "sample", s(&g), "--k", "20", "--trials", "30", "--seed", "9", "--no-meta"];
    let (c1, a) = run(&args);
    let (c2, b) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert_eq!(a["report"]["certifying"], false);
}

#[test]
fn random_games_are_seeded() {
    let args = ["random", "--topology", "tree", "--players", "5", "--max-actions", "3", "--seed", "2", "--no-meta"];
    let (_, a) = run(&args);
    let (_, b) = run(&args);
    assert_eq!(a, b);
    assert_eq!(a["n"], 5);
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["frobnicate"]).0, 1);
}
