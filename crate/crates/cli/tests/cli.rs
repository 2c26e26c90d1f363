use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("krein-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn realize(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_realize"));
    cmd.args(args).env_remove("KREIN_REALIZE_THREADS");
    if let Some(t) = threads {
        cmd.env("KREIN_REALIZE_THREADS", t);
    }
    cmd.output().unwrap()
}

const CONSTANT: &str = r#"{"field":"complex","dim":1,"coeffs":[[[[1,0]]]],"r":0.5,"r0":0.8,"N_list":[16,32]}"#;
const LINEAR: &str = r#"{"field":"complex","dim":1,"coeffs":[[[[1,0]]],[[[3,0]]]],"r":0.5,"r0":0.8,"N_list":[16,32]}"#;

#[test]
fn passing_run_exits_zero_with_json() {
    let cfg = scratch("constant.json", CONSTANT);
    let out = realize(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = krein_cli::report::from_json(&out.stdout).unwrap();
    assert_eq!(rep.records.len(), 2);
    assert!(rep.pass);
}

#[test]
fn report_is_deterministic_across_thread_counts() {
    let cfg = scratch("linear.json", LINEAR);
    let a = realize(&["--config", cfg.to_str().unwrap()], Some("1"));
    let b = realize(&["--config", cfg.to_str().unwrap()], Some("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_to_file() {
    let cfg = scratch("csv.json", CONSTANT);
    let target = cfg.with_file_name("table.csv");
    let out = realize(
        &["--config", cfg.to_str().unwrap(), "--format", "csv", "--out", target.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("16,16,0,0,16,"));
}

#[test]
fn failed_assertion_exits_one() {
    let strict = LINEAR.replace("}", r#","tolerances":{"moment":1e-300}}"#);
    let cfg = scratch("strict.json", &strict);
    let out = realize(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let rep = krein_cli::report::from_json(&out.stdout).unwrap();
    assert!(!rep.pass);
}

#[test]
fn config_errors_exit_two() {
    let bad = scratch("bad.json", &CONSTANT.replace("\"r\":0.5", "\"r\":0.9"));
    let out = realize(&["--config", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.r"));

    let missing = realize(&["--config", "/nonexistent/config.json"], None);
    assert_eq!(missing.status.code(), Some(2));

    let good = scratch("good.json", CONSTANT);
    let threads = realize(&["--config", good.to_str().unwrap()], Some("zero"));
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three() {
    let huge = CONSTANT.replace("[[[[1,0]]]]", "[[[[1e308,0]]]]");
    let cfg = scratch("huge.json", &huge);
    let out = realize(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N = 16"));
}
