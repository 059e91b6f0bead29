use std::path::PathBuf;
use std::process::{Command, Output};

use justcheck::clts::Clts;
use justcheck::liveness::VerdictJson;
use justcheck::runs::RunJson;

fn justcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_justcheck")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn justness_holds_exit_0() {
    let o = justcheck(&["liveness", "--example", "alice-cataline", "--goal", "eaten", "--criterion", "justness"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("HOLDS"));
}

#[test]
fn progress_fails_exit_1_with_lasso() {
    let o = justcheck(&["liveness", "--example", "alice-cataline", "--goal", "eaten", "--criterion", "progress"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("FAILS"));
    assert!(out.contains("s0 @ cycle: s0 -t0-> s0"), "{out}");
}

#[test]
fn fig3_table() {
    let o = justcheck(&["matrix", "--paper-fig3"]);
    assert_eq!(o.status.code(), Some(0));
    let want = "\
Liveness goal: | y=7   | x=1
Program        | P  Q  | P  Q
---------------+-------+------
full fairness  | +  +  | +  +
justness       | +  +  | +  -
progress       | +  +  | -  -
∅              | -  -  | -  -
";
    assert_eq!(stdout(&o), want);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["liveness", "--example", "croissant"][..],
        &["nonsense"],
        &["liveness", "--example", "nope", "--goal", "g", "--criterion", "progress"],
        &["liveness", "--example", "croissant", "--goal", "eaten", "--criterion", "fairness"],
        &["lts", "--ccs", "/nonexistent/file.ccs"],
    ] {
        let o = justcheck(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn ccs_file_with_blocking_override() {
    let f = scratch("phone.ccs", "X = a.X + 'b.X\nmain = (X | b.0) \\ {b}\n");
    let f = f.to_str().unwrap();
    let o = justcheck(&["lts", "--ccs", f]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("t1: s0 -tau {L, R}-> s1"), "{}", stdout(&o));

    // With nothing blocking, the a-loop is non-blocking and justness still fails.
    let o = justcheck(&["liveness", "--ccs", f, "--blocking", "", "--goal-states", "1", "--criterion", "justness"]);
    assert_eq!(o.status.code(), Some(1));
    let o = justcheck(&["liveness", "--ccs", f, "--goal-states", "s1", "--criterion", "weak-fairness"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn parse_prints_definitions() {
    let f = scratch("defs.ccs", "# phone\nX = 'b.X + a.X\nmain = (X | b.0) \\ b\n");
    let o = justcheck(&["parse", f.to_str().unwrap()]);
    assert_eq!(stdout(&o), "X = 'b.X + a.X\nmain = (X | b.0) \\ {b}\n");
    let bad = scratch("bad.ccs", "X = a.X +\n");
    let o = justcheck(&["parse", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_outputs_round_trip() {
    let o = justcheck(&["--json", "lts", "--example", "phone-Q"]);
    let c = Clts::from_json_str(&stdout(&o)).unwrap();
    assert_eq!(c, justcheck::catalog::load_example("phone-Q").unwrap().0);

    let o = justcheck(&["--json", "liveness", "--example", "phone-Q", "--goal", "connected", "--criterion", "justness"]);
    assert_eq!(o.status.code(), Some(1));
    let v: VerdictJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!v.holds);
    assert_eq!(v.counterexample, Some(RunJson { prefix: vec!["s0".into()], cycle: vec!["t0".into(), "s0".into()] }));

    let o = justcheck(&["--json", "matrix", "--paper-fig3"]);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn clts_file_input_and_validate() {
    let o = justcheck(&["catalog", "alice-cataline"]);
    let f = scratch("alice.json", &stdout(&o));
    let f = f.to_str().unwrap();
    let o = justcheck(&["liveness", "--clts", f, "--goal", "eaten", "--criterion", "justness"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(justcheck(&["validate", "--clts", f]).status.code(), Some(0));

    let broken = r#"{"states": ["1", "2", "3"], "initial": 0, "blocking": [],
        "transitions": [{"id": 0, "src": 0, "act": "a", "comps": ["L"], "tgt": 1},
                        {"id": 1, "src": 0, "act": "b", "comps": ["R"], "tgt": 2},
                        {"id": 2, "src": 2, "act": "a", "comps": ["L"], "tgt": 2}]}"#;
    let f = scratch("broken.json", broken);
    let o = justcheck(&["validate", "--clts", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("(t1, t0)"), "{}", stdout(&o));
    // Checks still run on such a system, flagged.
    let o = justcheck(&["liveness", "--clts", f.to_str().unwrap(), "--goal-states", "2", "--criterion", "progress"]);
    assert!(stdout(&o).contains("non-interference property unverified"));
}

#[test]
fn classify_text_and_json_runs() {
    let o = justcheck(&["classify", "--example", "phone-Q", "--run", "s0 @ cycle: s0 -t0-> s0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("J-fair        yes") && out.contains("weakly fair   no"), "{out}");

    let run = scratch("run.json", r#"{"prefix": ["s0", "t1", "s1"], "cycle": ["t2", "s1"]}"#);
    let o = justcheck(&["--json", "classify", "--example", "phone-Q", "--run", run.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["strongly_fair"], true);

    let o = justcheck(&["classify", "--example", "phone-Q", "--run", "s0 -t2-> s1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bisim_and_dot() {
    let o = justcheck(&["bisim", "par-P", "phone-Q"]);
    assert_eq!(o.status.code(), Some(0));
    let o = justcheck(&["--json", "bisim", "croissant", "alice-cataline"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bisimilar"], false);
    assert!(v["trace"].as_array().is_some());

    let o = justcheck(&["dot", "--example", "croissant", "--goal", "eaten"]);
    let out = stdout(&o);
    assert!(out.starts_with("digraph"));
    assert!(out.contains("fillcolor=gray"));
}

#[test]
fn output_is_deterministic() {
    let a = justcheck(&["matrix", "--example", "prog-Q-counter", "--goal", "x1"]);
    let b = justcheck(&["matrix", "--example", "prog-Q-counter", "--goal", "x1"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("J-fairness"));
}
