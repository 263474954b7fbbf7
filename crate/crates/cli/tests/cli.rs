use std::path::PathBuf;
use std::process::{Command, Output};

fn sagex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sagex"))
        .args(args)
        .env("NO_COLOR", "1")
        .env_remove("SAGEX_HEURISTIC_ORDER")
        .output()
        .expect("binary runs")
}

fn reference() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data/gdpr_art8.json")
        .to_string_lossy()
        .into_owned()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn validate_reports_violations_with_exit_2() {
    let ok = sagex(&["validate", &reference()]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));

    let dir = tempfile::tempdir().unwrap();
    let thin = write(&dir, "thin.json", r#"{ "rules": [{ "id": "r", "kind": "defeasible", "then": "p" }] }"#);
    let o = sagex(&["validate", &thin]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("unsourced-rule\tr"), "{}", stdout(&o));

    let broken = write(&dir, "broken.json", "{\n  \"rules\": [,]\n}");
    let o = sagex(&["validate", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn derive_handles_empty_and_cyclic_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(&dir, "empty.json", "{}");
    let o = sagex(&["derive", &empty]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");

    let cyclic = write(
        &dir,
        "cyclic.json",
        r#"{ "rules": [
            { "id": "r1", "kind": "defeasible", "if": ["p"], "then": "q" },
            { "id": "r2", "kind": "defeasible", "if": ["q"], "then": "p" }
        ] }"#,
    );
    let o = sagex(&["derive", &cyclic]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains('p') && err.contains('q'), "{err}");
}

#[test]
fn derive_json_carries_the_decision() {
    let o = sagex(&["derive", "--json", &reference()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["decision"]["deciding_rule"], "r_it");
    assert_eq!(v["decision"]["conclusion"]["defeasible"], true);
    assert_eq!(v["derivation"]["causal_chain"].as_array().unwrap().len(), 2);
}

#[test]
fn empty_script_prints_only_the_incipit() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(&dir, "empty.script", "# nothing\n\n");
    let o = sagex(&["explain", &reference(), "--script", &script]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("== E_0\n"));
    assert_eq!(out.matches("\n[Incipit] ").count() + usize::from(out.starts_with("[Incipit]")), 4);
    assert!(!out.contains("== narrative"));
}

#[test]
fn script_errors_exit_4_with_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let illegal = write(&dir, "illegal.script", "expand incipit:justification\n\nexpand rule:nope\n");
    let o = sagex(&["explain", &reference(), "--script", &illegal]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    // steps before the failure are still shown
    assert!(stdout(&o).contains("== 1. expand incipit:justification"));

    let garbled = write(&dir, "garbled.script", "mark rule:r_it supports no quotes\n");
    let o = sagex(&["explain", &reference(), "--script", &garbled]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn narrative_goes_to_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(&dir, "s.script", "expand incipit:justification\nwhatif jurisdiction(marco)=france\n");
    let out = dir.path().join("narrative.json");
    let o = sagex(&[
        "explain",
        &reference(),
        "--script",
        &script,
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!stdout(&o).contains("== narrative"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["path"].as_array().unwrap().len(), 2);
    let kinds: Vec<&str> = v["sections"].as_array().unwrap().iter().map(|s| s["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"causal"), "{kinds:?}");
}

#[test]
fn interactive_mode_applies_numbered_choices() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_sagex"))
        .args(["explain", &reference(), "--interactive"])
        .env("NO_COLOR", "1")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1\nexpand nowhere\nq\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("== 1. expand "), "{out}");
    assert!(out.contains("unknown_target"), "{out}");
    assert!(out.contains("## Path"), "{out}");
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(sagex(&["bogus"]).status.code(), Some(1));
    assert_eq!(sagex(&["explain"]).status.code(), Some(1));
    assert_eq!(sagex(&["--help"]).status.code(), Some(0));
    let missing = sagex(&["derive", "/definitely/not/here.json"]);
    assert_eq!(missing.status.code(), Some(1));
}
