use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const ECONOMY: &str = r#"{
  "goods": 2,
  "endowment": [3.0, 3.0],
  "families": [
    {"id": "f", "members": [
      {"id": "h", "utility": {"kind": "cobb_douglas", "weights": [0.2, 0.8]}},
      {"id": "w", "utility": {"kind": "cobb_douglas", "weights": [0.8, 0.2]}}]},
    {"id": "s", "members": [
      {"id": "s", "utility": {"kind": "cobb_douglas", "weights": [0.6, 0.4]}}]}
  ]
}"#;

const EQUAL_SPLIT: &str = r#"{"bundles": {"f": [1.5, 1.5], "s": [1.5, 1.5]}}"#;
const LOPSIDED: &str = r#"{"bundles": {"f": [0.5, 0.5], "s": [2.5, 2.5]}}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace {
            dir: TempDir::new().unwrap(),
        };
        ws.write("econ.json", ECONOMY);
        ws.write("equal.json", EQUAL_SPLIT);
        ws.write("lopsided.json", LOPSIDED);
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_famdiv"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

#[test]
fn equal_split_passes_individual_no_envy() {
    let ws = Workspace::new();
    let out = ws.run(&["check", "econ.json", "--allocation", "equal.json", "--criterion", "individual-ne"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_check_exits_one_with_witnesses() {
    let ws = Workspace::new();
    let out = ws.run(&[
        "--json",
        "check",
        "econ.json",
        "--allocation",
        "lopsided.json",
        "--criterion",
        "individual_fs",
    ]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["holds"], false);
    let who: Vec<&str> = report["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["who"].as_str().unwrap())
        .collect();
    assert_eq!(who.len(), 2);
    assert!(who.contains(&"h") && who.contains(&"w"));
}

#[test]
fn explicit_reference_is_used() {
    let ws = Workspace::new();
    let out = ws.run(&[
        "--json",
        "check",
        "econ.json",
        "--allocation",
        "equal.json",
        "--criterion",
        "individual-ee",
        "--reference",
        "1.5,1.5",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["reference"], serde_json::json!([1.5, 1.5]));
}

#[test]
fn pareto_reports_dominator_for_inefficient_allocation() {
    let ws = Workspace::new();
    ws.write("skew.json", r#"{"bundles": {"f": [0.5, 2.5], "s": [2.5, 0.5]}}"#);
    let out = ws.run(&["--json", "pareto", "econ.json", "--allocation", "skew.json", "--grid", "12"]);
    let verdict = json(&out);
    assert_eq!(code(&out), 1, "{verdict}");
    assert_eq!(verdict["optimal"], false);
    assert!(verdict["dominator"].is_object());
}

#[test]
fn family_ee_solve_writes_allocation_and_reference() {
    let ws = Workspace::new();
    let out = ws.run(&["--json", "solve", "econ.json", "--method", "family-ee", "--out", "sol.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let value = json(&out);
    for key in ["allocation", "V", "t", "reference"] {
        assert!(!value[key].is_null(), "missing {key}");
    }
    assert!(Path::new(&ws.path("sol.json")).exists());

    // The written document is a valid allocation for the economy.
    let reference = value["reference"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap().to_string())
        .collect::<Vec<_>>()
        .join(",");
    let out = ws.run(&[
        "check",
        "econ.json",
        "--allocation",
        "sol.json",
        "--criterion",
        "family-ee",
        "--reference",
        &reference,
        "--eps",
        "1e-5",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn every_solve_method_runs() {
    let ws = Workspace::new();
    for method in ["leximin", "fs-welfare", "family-ee", "equilibrium", "restricted-equilibrium"] {
        let out = ws.run(&["--json", "solve", "econ.json", "--method", method]);
        assert_eq!(code(&out), 0, "{method}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(json(&out)["bundles"].is_object(), "{method}");
    }
}

#[test]
fn certify_reports_history() {
    let ws = Workspace::new();
    let out = ws.run(&["--json", "certify", "econ.json", "--criteria", "individual-ne,pareto", "--grid", "8"]);
    assert_eq!(code(&out), 0);
    let cert = json(&out);
    assert_eq!(cert["history"].as_array().unwrap().len(), 2);
    assert_eq!(cert["history"][1]["grid_n"], 16);
}

#[test]
fn usage_errors_exit_two() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.run(&["repro", "unknown"])), 2);
    assert_eq!(code(&ws.run(&["check", "missing.json", "--allocation", "equal.json", "--criterion", "individual-ne"])), 2);
    assert_eq!(code(&ws.run(&["check", "econ.json", "--allocation", "equal.json", "--criterion", "envy"])), 2);
    ws.write("broken.json", "{\"goods\": 2,");
    assert_eq!(code(&ws.run(&["pareto", "broken.json", "--allocation", "equal.json"])), 2);
    ws.write("stranger.json", r#"{"bundles": {"f": [1.5, 1.5], "x": [1.5, 1.5]}}"#);
    assert_eq!(code(&ws.run(&["pareto", "econ.json", "--allocation", "stranger.json"])), 2);
    assert_eq!(code(&ws.run(&["solve", "econ.json"])), 2);
}

#[test]
fn single_scenario_runs() {
    let ws = Workspace::new();
    let out = ws.run(&["--json", "repro", "negative_ceei_fs"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["passed"], true);
    assert_eq!(report["scenarios"][0]["scenario"], "negative_ceei_fs");
}

#[test]
fn repro_all_passes_and_is_deterministic() {
    let ws = Workspace::new();
    let first = ws.run(&["--json", "repro", "--all"]);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stdout));
    let second = ws.run(&["--json", "repro", "--all", "--parallel"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn thread_cap_is_validated() {
    let ws = Workspace::new();
    let out = Command::new(env!("CARGO_BIN_EXE_famdiv"))
        .current_dir(ws.dir.path())
        .env("FAMDIV_THREADS", "zero")
        .args(["repro", "--list"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
