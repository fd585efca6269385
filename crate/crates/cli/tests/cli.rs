use std::process::{Command, Output};

fn tiips(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiips")).args(args).output().unwrap()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(tiips(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tiips(&["solve", "--tasks", "/nonexistent/tasks.jsonl"]).status.code(), Some(1));
    assert_eq!(tiips(&["gen", "--domain", "list", "--category", "nope"]).status.code(), Some(1));
    assert_eq!(tiips(&["solve", "--inductive", "oracle", "--tasks", "x"]).status.code(), Some(1));
}

#[test]
fn gen_solve_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = |p: &str| dir.path().join(p).to_string_lossy().into_owned();
    let out = tiips(&["gen", "--domain", "list", "--category", "compose_new_operation", "--count", "6", "--train-count", "2", "--seed", "3", "--out", &d("tasks")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let test = std::fs::read_to_string(d("tasks/list_compose_new_operation_test.jsonl")).unwrap();
    let train = std::fs::read_to_string(d("tasks/list_compose_new_operation_train.jsonl")).unwrap();
    assert_eq!((test.lines().count(), train.lines().count()), (6, 2));

    // flags override the config file
    std::fs::write(d("run.toml"), "solver = \"baseline\"\nstep_limit = 10\n").unwrap();
    let out = tiips(&["solve", "--config", &d("run.toml"), "--solver", "exedec", "--tasks", &d("tasks/list_compose_new_operation_test.jsonl"), "--out", &d("t.jsonl")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("exedec solved"), "{stdout}");

    let out = tiips(&["report", &d("t.jsonl"), "--out", &d("report")]);
    assert!(out.status.success());
    for f in ["summary.csv", "table.csv", "scatter.csv", "histogram.csv"] {
        assert!(dir.path().join("report").join(f).exists(), "{f}");
    }

    std::fs::write(d("bad.toml"), "no_such_key = 1\n").unwrap();
    assert_eq!(tiips(&["solve", "--config", &d("bad.toml"), "--tasks", &d("t.jsonl")]).status.code(), Some(1));
}
