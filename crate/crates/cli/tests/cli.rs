use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EXAMPLE: &str = r#"{"steps":[[1,1],[1,0],[2,3]]}"#;

fn tdspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdspace"))
        .args(args)
        .env_remove("TD_MAX_MEM")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn lines_with(text: &str, pat: &str) -> usize {
    text.lines().filter(|l| l.contains(pat)).count()
}

#[test]
fn words_totals() {
    let o = tdspace(&["words", "-n", "6", "--recursion"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("total 1539281"));
    assert!(stdout(&tdspace(&["words", "-n", "1"])).contains("total 1"));
    let o = tdspace(&["words", "-n", "5", "--enumerate", "--recursion"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("recursion 15315 enumeration 15315"));
}

#[test]
fn words_json() {
    let o = tdspace(&["words", "-n", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total"], 22);
    assert_eq!(v["rows"][0]["m"], 3);
}

#[test]
fn count_worked_example_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "e.json", EXAMPLE);
    let o = tdspace(&["count", f.to_str().unwrap(), "--oracle"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("site=fence(1) factor=27"));
    assert!(out.contains("site=fence(3) factor=2"));
    assert!(out.contains("site=node(1_b) factor=10"));
    assert!(out.contains("27 * 2 * 10 = 540"));
    assert!(out.contains("oracle=540 agree"));
}

#[test]
fn count_small_evolutions() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "one.json", r#"{"steps":[]}"#);
    assert_eq!(stdout(&tdspace(&["count", f.to_str().unwrap()])).trim(), "1");
    let o = tdspace(&["count", "--words", "1 121", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 5);
}

#[test]
fn count_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.json", r#"{"steps":[[2,2],[1,1],[2,3]]}"#);
    let o = tdspace(&["count", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("step"));
}

#[test]
fn oracle_budget_exit_code() {
    let o = tdspace(&["count", "--words", "1 121 3121 3124121", "--oracle", "--max-nodes", "4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn table_rows() {
    let o = tdspace(&["table", "-n", "3", "--all"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "n,words,cnvs,td_graphs,evolutions\n1,1,1,1,1\n2,3,7,8,11\n3,22,225,288,627\n"
    );
}

#[test]
fn table_budgets() {
    assert_eq!(code(&tdspace(&["table", "-n", "5"])), 2);
    assert_eq!(code(&tdspace(&["table", "-n", "3", "--max-records", "10"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_tdspace"))
        .args(["table", "-n", "3"])
        .env("TD_MAX_MEM", "1K")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn table_record_export() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("records.jsonl");
    let o = tdspace(&["table", "-n", "2", "--records", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().count(), 11);
    for line in text.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn verify_suites_pass() {
    for (suite, n) in [("structure", "4"), ("kernel", "3"), ("induction", "3"), ("grand-total", "4")] {
        let o = tdspace(&["verify", "--suite", suite, "-n", n]);
        assert_eq!(code(&o), 0, "{suite}: {}", stdout(&o));
        assert!(stdout(&o).contains(&format!("suite {suite} n={n}: PASS")));
        assert!(!stdout(&o).contains("FAIL"));
    }
    let o = tdspace(&["verify", "--suite", "kernel", "-n", "1"]);
    assert!(stdout(&o).contains("PASS fenced example r=5: 18 = 18"));
}

#[test]
fn verify_json_report() {
    let o = tdspace(&["verify", "--suite", "grand-total", "-n", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suite"], "grand-total");
    assert!(v["checks"].as_array().unwrap().len() >= 2);
}

#[test]
fn verify_budget_exit_code() {
    assert_eq!(code(&tdspace(&["verify", "--suite", "kernel", "-n", "9"])), 2);
}

#[test]
fn time_limit_exit_code() {
    let o = tdspace(&["verify", "--suite", "structure", "-n", "5", "--time-limit", "0.001"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn export_dot_counts() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "e.json", EXAMPLE);
    let dot = stdout(&tdspace(&["export", f.to_str().unwrap(), "--what", "tree"]));
    assert_eq!(lines_with(&dot, "shape="), 10);
    assert_eq!(lines_with(&dot, "shape=box"), 5);
    assert_eq!(lines_with(&dot, "style=solid"), 8);
    assert_eq!(lines_with(&dot, "style=dashed"), 8);
    assert_eq!(lines_with(&dot, "style=bold"), 2);
    let major = stdout(&tdspace(&["export", f.to_str().unwrap(), "--what", "major"]));
    assert_eq!(lines_with(&major, "->"), 10);

    let single = write(dir.path(), "one.json", r#"{"steps":[]}"#);
    let dot = stdout(&tdspace(&["export", single.to_str().unwrap()]));
    assert_eq!(lines_with(&dot, "shape="), 4);
}

#[test]
fn export_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "e.json", EXAMPLE);
    let tree = dir.path().join("tree.json");
    let o = tdspace(&["export", f.to_str().unwrap(), "--format", "json", "-o", tree.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let first = std::fs::read_to_string(&tree).unwrap();
    let again = stdout(&tdspace(&["export", tree.to_str().unwrap(), "--format", "json"]));
    assert_eq!(first, again);
    let hasse = stdout(&tdspace(&["export", tree.to_str().unwrap(), "--what", "hasse", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&hasse).unwrap();
    assert_eq!(v["labels"].as_array().unwrap().len(), 10);
}

#[test]
fn induce_single_td() {
    let o = tdspace(&["induce", "--words", "1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("{1_a,1_b,2_a,2_b}\t5"));
    assert!(out.contains("3 induced evolutions, sum 11, expected 11 agree"));
}

#[test]
fn beta_requires_seed() {
    assert_eq!(code(&tdspace(&["beta"])), 1);
}

#[test]
fn beta_sweep_is_deterministic_across_workers() {
    let one = tdspace(&["beta", "--seed", "42", "--trees", "60", "--example", "--workers", "1", "--format", "json"]);
    let four = tdspace(&["beta", "--seed", "42", "--trees", "60", "--example", "--workers", "4", "--format", "json"]);
    assert_eq!(code(&one), 0);
    assert_eq!(stdout(&one), stdout(&four));
    let v: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["example"], true);
}

#[test]
fn unsupported_format_is_usage_error() {
    assert_eq!(code(&tdspace(&["table", "-n", "1", "--format", "dot"])), 1);
}
