use std::path::PathBuf;
use std::process::{Command, Output};

fn demo_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("demos").join(format!("{name}.json"))
}

fn jmarkov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jmarkov"))
        .args(args)
        .env_remove("JMARKOV_TOL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn passing_scenario_exits_zero() {
    let p = demo_path("classical-chain");
    let o = jmarkov(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("overall: PASS"));
}

#[test]
fn failing_scenario_exits_one() {
    let p = demo_path("non-markov");
    let o = jmarkov(&["check", p.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["overall"], "fail");
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema\": 1, \"ambient_dim\": ").unwrap();
    let o = jmarkov(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(jmarkov(&["check", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(jmarkov(&["demo", "run", "no-such-demo"]).status.code(), Some(2));
    assert_eq!(jmarkov(&["check", demo_path("classical-chain").to_str().unwrap(), "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn demo_list_and_show() {
    let o = jmarkov(&["demo", "list"]);
    assert_eq!(o.status.code(), Some(0));
    for name in jmarkov_cli::demos::NAMES {
        assert!(stdout(&o).contains(name));
        let shown = jmarkov(&["demo", "show", name]);
        assert_eq!(stdout(&shown), std::fs::read_to_string(demo_path(name)).unwrap());
    }
}

#[test]
fn demo_run_reports_expected_kernel() {
    let o = jmarkov(&["demo", "run", "classical-chain", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let k = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "kernels").unwrap();
    let m: Vec<Vec<f64>> = serde_json::from_value(k["data"]["matrices"]["V_{0,1}"].clone()).unwrap();
    for (got, want) in m.iter().flatten().zip([0.9, 0.1, 0.2, 0.8]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn seed_flag_is_recorded() {
    let o = jmarkov(&["demo", "run", "trace-compat", "--seed", "1234", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ep = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "event_pairs").unwrap();
    assert_eq!(ep["seed"], 1234);
}

#[test]
fn env_tolerance_applies_and_flag_beats_it() {
    // with a loose equality tolerance (0.1 > the 0.05 gap) every event pair passes even for a
    // non-tracial state; the flag restores the strict default
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("qubit.json");
    let mut s = jmarkov_cli::demos::demo("qubit-unitary").unwrap();
    s.state = vec![
        vec![jmarkov_cli::scenario::Complex(0.6, 0.0), jmarkov_cli::scenario::Complex(0.0, 0.0)],
        vec![jmarkov_cli::scenario::Complex(0.0, 0.0), jmarkov_cli::scenario::Complex(0.4, 0.0)],
    ];
    s.checks = vec![jmarkov_cli::scenario::CheckName::ConditionI];
    std::fs::write(&file, jmarkov_cli::emit(&s)).unwrap();
    let path = file.to_str().unwrap();
    let strict = jmarkov(&["check", path]);
    assert_eq!(strict.status.code(), Some(1));
    let loose = Command::new(env!("CARGO_BIN_EXE_jmarkov")).args(["check", path]).env("JMARKOV_TOL", "0.1").output().unwrap();
    assert_eq!(loose.status.code(), Some(0), "{}", stdout(&loose));
    let flagged = Command::new(env!("CARGO_BIN_EXE_jmarkov"))
        .args(["check", path, "--tol", "1e-9"])
        .env("JMARKOV_TOL", "0.1")
        .output()
        .unwrap();
    assert_eq!(flagged.status.code(), Some(1));
    let bad = Command::new(env!("CARGO_BIN_EXE_jmarkov")).args(["check", path]).env("JMARKOV_TOL", "abc").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn kernels_command_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.json");
    let o = jmarkov(&["kernels", demo_path("classical-chain").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["kernels"].as_array().unwrap().len(), 3);
}

#[test]
fn generator_command() {
    let p = demo_path("qubit-unitary");
    let o = jmarkov(&["generator", p.to_str().unwrap(), "--delta", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("classification: derivation"));
    assert_eq!(jmarkov(&["generator", p.to_str().unwrap(), "--delta", "0.3"]).status.code(), Some(1));
    let t = demo_path("trace-compat");
    assert_eq!(jmarkov(&["generator", t.to_str().unwrap(), "--delta", "1"]).status.code(), Some(2));
}
