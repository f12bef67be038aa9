use std::io::Write;
use std::process::{Command, Output};

fn g2t(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2t")).args(args).output().expect("binary runs")
}

fn temp_model(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("g2t-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::File::create(&path).unwrap().write_all(text.as_bytes()).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bundled_examples_exit_codes() {
    // example1 expects a family dimension of 15; the solver finds 16
    assert_eq!(g2t(&["--example", "example1"]).status.code(), Some(1));
    assert_eq!(g2t(&["--example", "example2"]).status.code(), Some(0));
    assert_eq!(g2t(&["--example", "example3"]).status.code(), Some(0));
}

#[test]
fn example3_reports_dual_data() {
    let o = g2t(&["--example", "example3", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], true);
    let tasks = v["tasks"].as_array().unwrap();
    let dualize = tasks.iter().find(|t| t["command"] == "dualize").unwrap();
    assert_eq!(dualize["values"]["dual_h"], "e135 + e146");
    let transport = tasks.iter().find(|t| t["command"] == "transport").unwrap();
    assert_eq!(
        transport["values"]["transported"],
        "-e12 - e34 - e56 + e1367 + e1457 + e2357 - e2467 + e123456"
    );
}

#[test]
fn example1_solve_h_report() {
    let o = g2t(&["--example", "example1", "--task", "solve-h", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let tasks = v["tasks"].as_array().unwrap();
    assert_eq!(tasks.len(), 1);
    assert_eq!(tasks[0]["values"]["dimension"], 16);
    let failing: Vec<&str> = tasks[0]["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v["pass"] == false)
        .map(|v| v["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["dimension == 15", "contains h3", "contains h4", "contains h15"]);
}

#[test]
fn task_filter_still_sees_dualize_state() {
    let o = g2t(&["--example", "example3", "--task", "transport"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("task 10: transport"));
    assert!(!out.contains("dualize"));
}

#[test]
fn json_output_is_deterministic() {
    for name in ["example1", "example2", "example3"] {
        let a = g2t(&["--example", name, "--json"]);
        let b = g2t(&["--example", name, "--json"]);
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn empty_task_list_exits_zero() {
    let path = temp_model("empty.g2t", "# nothing to do\nalgebra g dim 3\n");
    let o = g2t(&["--model", path.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tasks"].as_array().unwrap().len(), 0);
}

#[test]
fn parse_errors_exit_two_with_position() {
    let path = temp_model("bad.g2t", "algebra g dim 3\n  d e3 = e11\n");
    let o = g2t(&["--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    let path = temp_model("usage.g2t", "algebra g dim 3\ntask dualize g nofiber 0\n");
    assert_eq!(g2t(&["--model", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(g2t(&["--model", "/nonexistent/model.g2t"]).status.code(), Some(2));
    assert_eq!(g2t(&["--example", "example3", "--task", "bogus"]).status.code(), Some(2));
    assert_eq!(g2t(&[]).status.code(), Some(2));
}

#[test]
fn failing_verdicts_carry_witnesses() {
    let path = temp_model("fail.g2t", "algebra h dim 3\n  d e3 = e12\ntask differential e3 on h expect equals 0\n");
    let o = g2t(&["--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL de3 == 0: got e12"));
}

#[test]
fn print_is_canonical() {
    let o = g2t(&["--example", "example2", "--print"]);
    let printed = stdout(&o);
    let path = temp_model("printed.g2t", &printed);
    let again = g2t(&["--model", path.to_str().unwrap(), "--print"]);
    assert_eq!(stdout(&again), printed);
}
