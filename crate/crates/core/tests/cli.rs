use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackcat")).args(args).output().expect("binary runs")
}

fn run_file(args: &[&str], file: &str) -> Output {
    let path = data(file);
    let mut all: Vec<&str> = args.to_vec();
    all.push(path.to_str().unwrap());
    run(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn json_report_carries_status_and_digests() {
    let o = run_file(&["--json", "check", "--stack"], "nonsheaf.site");
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["status"], "fail");
    assert_eq!(r["exit_code"], 1);
    assert_eq!(r["result"]["witness"]["object"], "X");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(r["limits"]["max_homset"], 64);
}

#[test]
fn syntax_errors_point_at_the_token() {
    let o = run_file(&["validate"], "syntax_error.site");
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("syntax_error.site:4:10"), "{err}");
    assert!(err.contains("hint:"), "{err}");
}

#[test]
fn validate_lists_topology_violations() {
    let v = run_file(&["--json", "validate"], "broken_topology.site");
    let r: Value = serde_json::from_str(&stdout(&v)).unwrap();
    let kinds: Vec<&str> = r["result"]["violations"].as_array().unwrap().iter().map(|v| v["at"].as_str().unwrap()).collect();
    assert!(kinds.iter().all(|k| *k == "topology on C"));
    assert!(!kinds.is_empty());
}

#[test]
fn json_input_is_accepted_and_tampering_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let json = stdout(&run_file(&["fmt", "--to", "json"], "sheaf.site"));
    let good = dir.path().join("sheaf.json");
    std::fs::write(&good, &json).unwrap();
    let o = run(&["check", "--stack", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, json.replacen("p0", "p9", 1)).unwrap();
    assert_eq!(run(&["check", "--stack", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sheafify_emits_a_sheaf() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sheaf.site");
    let o = run_file(&["sheafify", "--emit", out.to_str().unwrap()], "nonsheaf.site");
    assert_eq!(o.status.code(), Some(0));
    let c = run(&["check", "--stack", "--indexed", "F_sheaf", out.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0), "{}", stdout(&c));
}

#[test]
fn descent_data_of_the_span_cover_are_pairs() {
    let o = run_file(&["--json", "desc", "--object", "X"], "nonsheaf.site");
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["result"]["data"].as_array().unwrap().len(), 2);
    assert_eq!(r["result"]["sieve"], serde_json::json!(["j_p", "j_q"]));
}

#[test]
fn grothendieck_emit_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("groth.site");
    assert_eq!(run_file(&["groth", "--emit", out.to_str().unwrap()], "arrow.site").status.code(), Some(0));
    let o = run(&["validate", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn fibration_and_factorization_commands_pass() {
    assert_eq!(run_file(&["fiber-adjunction", "--fibration", "p"], "maps.site").status.code(), Some(0));
    assert_eq!(run_file(&["factorize", "--map", "phi"], "maps.site").status.code(), Some(0));
    assert_eq!(run_file(&["fiberwise"], "nonsheaf.site").status.code(), Some(0));
    assert_eq!(run_file(&["giraud"], "arrow.site").status.code(), Some(0));
}

#[test]
fn ambiguous_selection_asks_for_a_flag() {
    let o = run_file(&["stackify"], "maps.site");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("--indexed"));
}

#[test]
fn cap_flags_reach_the_elaborator() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.site");
    std::fs::write(&path, "category M { objects: s; morphisms: t: s -> s; compose: t . t = id_s; }\n").unwrap();
    let path = path.to_str().unwrap();
    assert_eq!(run(&["fmt", path]).status.code(), Some(0));
    assert_eq!(run(&["--max-closure", "1", "fmt", path]).status.code(), Some(3));
}
