use std::path::PathBuf;
use std::process::{Command, Output};

use envyorder_cli::file::ProblemFile;
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn envyorder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_envyorder")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    envyorder(args).status.code().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = envyorder(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_reports_the_optimum() {
    let report = json(&["solve", &fixture("dominance.toml"), "--weights", "thm1", "--solver", "exact"]);
    assert_eq!(report["best_orders"], serde_json::json!([["2", "1", "3"]]));
    assert_eq!(report["expected_envy"]["fraction"], "1/3");
    assert_eq!(report["certified"], true);
    assert_eq!(report["weight_class"], "constant");
}

#[test]
fn solvers_agree_on_the_five_agent_example() {
    let path = fixture("five_agents.toml");
    let exact = json(&["solve", &path, "--solver", "exact"]);
    let dp = json(&["solve", &path, "--solver", "dp"]);
    let local = json(&["solve", &path, "--solver", "local"]);
    assert_eq!(exact["best_orders"], dp["best_orders"]);
    assert_eq!(exact["objective"], local["objective"]);
    assert_eq!(local["certified"], false);
}

#[test]
fn independent_weights_carry_the_envy_factor() {
    let report = json(&["solve", &fixture("five_agents_independent.toml")]);
    assert_eq!(report["weights"], "prop2");
    assert_eq!(report["envy_factor"]["fraction"], "1/5");
}

#[test]
fn run_lists_triplets() {
    let report = json(&["run", &fixture("dominance.toml"), "--order", "2,1,3", "--ranking", "b,a,c"]);
    assert_eq!(report["envy"]["count"], 1);
    let triplet = &report["envy"]["triplets"][0];
    assert_eq!((triplet["envier"].as_str(), triplet["envied"].as_str()), (Some("3"), Some("1")));
    assert_eq!(report["matching"][0]["object"], "b");
}

#[test]
fn evaluate_exact_and_monte_carlo() {
    let path = fixture("dominance.toml");
    let exact = json(&["evaluate", &path, "--order", "2,1,3"]);
    assert_eq!(exact["expected_envy"]["fraction"], "1/3");
    assert_eq!(exact["samples"], "6");
    let mc = json(&["evaluate", &path, "--order", "2,1,3", "--method", "mc", "--samples", "20000", "--seed", "3"]);
    let mean = mc["expected_envy"]["decimal"].as_f64().unwrap();
    let se = mc["standard_error"].as_f64().unwrap();
    assert!((mean - 1.0 / 3.0).abs() <= 4.0 * se, "{mean} ± {se}");
    assert_eq!(
        mc,
        json(&["evaluate", &path, "--order", "2,1,3", "--method", "mc", "--samples", "20000", "--seed", "3"])
    );
}

#[test]
fn baselines_on_a_common_priority_are_envy_free() {
    let report = json(&["baselines", &fixture("common.toml")]);
    let rows = report["baselines"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert_eq!(row["order"], serde_json::json!(["cy", "ann", "dee", "bob"]));
        assert_eq!(row["expected_envy"]["fraction"], "0");
    }
}

#[test]
fn weights_csv_has_a_zero_first_cell_with_two_seats() {
    let out = envyorder(&["weights", &fixture("two_seats.toml"), "--weights", "prop3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("object,earlier,later,weight,decimal"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..4], &["a", "1", "2", "0"]);
}

#[test]
fn verify_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let args = ["verify", "--max-n", "3", "--trials", "5", "--threads", "2", "-o", out.to_str().unwrap()];
    assert_eq!(code(&args), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 6);
    assert_eq!(report["config"]["trials"], 5);
}

#[test]
fn exit_codes() {
    let dominance = fixture("dominance.toml");
    assert_eq!(code(&["solve", "no/such/file.toml"]), 2);
    assert_eq!(code(&["solve", &dominance, "--weights", "bogus"]), 2);
    assert_eq!(code(&["run", &dominance, "--order", "1,2"]), 2);
    assert_eq!(code(&["evaluate", &dominance, "--order", "1,2,3", "--method", "mc"]), 2);
    assert_eq!(code(&["verify", "--trials", "0"]), 2);
    assert_eq!(code(&["verify", "--max-n", "9"]), 2);
    assert_eq!(code(&["solve", &dominance, "--weights", "prop2"]), 3);
    assert_eq!(code(&["solve", &fixture("two_seats.toml"), "--weights", "thm1"]), 3);
    assert_eq!(code(&["solve", &fixture("two_seats.toml"), "--weights", "prop3", "--solver", "dp"]), 3);
    assert_eq!(code(&["evaluate", &dominance, "--order", "1,2,3", "--seed", "1"]), 3);
    assert_eq!(code(&["evaluate", &fixture("five_agents_independent.toml"), "--order", "1,2,3,4,5"]), 4);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn error_messages_name_the_problem() {
    let out = envyorder(&["run", &fixture("dominance.toml"), "--order", "1,2"]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("error: "), "{stderr}");
    assert!(stderr.contains('3'), "{stderr}");
}

#[test]
fn problem_files_round_trip() {
    for name in ["dominance.toml", "five_agents.toml", "two_seats.toml", "explicit.toml", "common.toml"] {
        let file = ProblemFile::load(fixture(name).as_ref()).unwrap();
        let (problem, spec) = file.to_model().unwrap();
        let text = ProblemFile::from_model(&problem, &spec).to_toml();
        let (again, spec_again) = ProblemFile::parse(&text).unwrap().to_model().unwrap();
        assert_eq!(problem, again, "{name}");
        assert_eq!(spec, spec_again, "{name}");
    }
}

#[test]
fn problem_from_standard_input() {
    use std::io::Write;
    use std::process::Stdio;
    let text = std::fs::read_to_string(fixture("dominance.toml")).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_envyorder"))
        .args(["solve", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["best_orders"][0], serde_json::json!(["2", "1", "3"]));
}
