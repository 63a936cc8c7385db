use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const MYNAT: &str = include_str!("../../core/tests/fixtures/mynat/Example.lean");

fn archforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archforge"))
        .args(args)
        .current_dir(dir)
        .env_remove("ARCHFORGE_CONFIG")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn project(files: &[(&str, &str)]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (rel, text) in files {
        fs::write(dir.path().join(rel), text).unwrap();
    }
    dir
}

#[test]
fn extract_reports_fresh_and_stale() {
    let d = project(&[("Example.lean", MYNAT)]);
    let o = archforge(d.path(), &["extract"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("stale Example"));
    assert!(stdout(&o).contains("5 node fragments written"));
    let o = archforge(d.path(), &["extract"]);
    assert!(stdout(&o).contains("fresh Example"));
    assert!(stdout(&o).contains("0 of 1 modules rebuilt"));
}

#[test]
fn extract_out_overrides_config() {
    let d = project(&[("Example.lean", MYNAT)]);
    assert_eq!(
        code(&archforge(d.path(), &["extract", "--out", "elsewhere"])),
        0
    );
    assert!(d.path().join("elsewhere/manifest.json").is_file());
    assert!(!d.path().join("build").exists());
}

#[test]
fn extract_exit_codes() {
    let d = project(&[("W.lean", "import Foo\nimport Foo\n")]);
    assert_eq!(code(&archforge(d.path(), &["extract"])), 0);
    let o = archforge(d.path(), &["extract", "--strict"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate import"));
    fs::write(d.path().join("W.lean"), "@[blueprint\ndef x := 1\n").unwrap();
    assert_eq!(code(&archforge(d.path(), &["extract"])), 1);
}

#[test]
fn locked_output_fails_fast() {
    let d = project(&[("Example.lean", MYNAT)]);
    fs::create_dir_all(d.path().join("build/blueprint")).unwrap();
    fs::write(d.path().join("build/blueprint/.archforge.lock"), "1").unwrap();
    let o = archforge(d.path(), &["extract"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("locked"));
}

#[test]
fn check_exit_codes() {
    let d = project(&[(
        "M.lean",
        "@[blueprint \"lonely\" (statement := /-- Alone. -/)]\ndef lonely := 1\n",
    )]);
    let o = archforge(d.path(), &["check"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("warning[isolated-node] lonely"));
    assert_eq!(code(&archforge(d.path(), &["check", "--strict"])), 1);

    fs::write(d.path().join("bp.tex"), "\\inputleannode{ghost}\n").unwrap();
    fs::write(
        d.path().join("architect.json"),
        r#"{"blueprintTex": ["bp.tex"]}"#,
    )
    .unwrap();
    let o = archforge(d.path(), &["check"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("error[dangling-label] ghost"));
}

#[test]
fn config_env_var_and_flag() {
    let d = project(&[("Example.lean", MYNAT)]);
    fs::write(d.path().join("alt.json"), r#"{"outDir": "alt-out"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_archforge"))
        .arg("extract")
        .current_dir(d.path())
        .env("ARCHFORGE_CONFIG", d.path().join("alt.json"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(d.path().join("alt-out/graph.dot").is_file());

    fs::write(d.path().join("bad.json"), r#"{"sourceRoots": []}"#).unwrap();
    let o = archforge(d.path(), &["--config", "bad.json", "status"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sourceRoots"));
    fs::write(d.path().join("typo.json"), r#"{"outdir": "x"}"#).unwrap();
    assert_eq!(
        code(&archforge(d.path(), &["--config", "typo.json", "status"])),
        1
    );
}

#[test]
fn status_json_matches_store() {
    let d = project(&[("Example.lean", MYNAT)]);
    let o = archforge(d.path(), &["status", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["totalNodes"], 5);
    assert_eq!(v["proofsLeanOk"], 1);
    assert_eq!(v["sorriedProofs"], 2);
    let text = stdout(&archforge(d.path(), &["status"]));
    assert!(text.contains("proofs leanOk:      1 of 3"));
}

#[test]
fn graph_formats_and_out_file() {
    let d = project(&[("Example.lean", MYNAT)]);
    let dot = stdout(&archforge(d.path(), &["graph"]));
    assert!(dot.starts_with("digraph blueprint {"));
    let o = archforge(d.path(), &["graph", "--format", "json", "--out", "g.json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("g.json")).unwrap()).unwrap();
    assert!(v.is_object());
    assert_ne!(code(&archforge(d.path(), &["graph", "--format", "svg"])), 0);
}

#[test]
fn convert_dry_run_and_apply() {
    let d = project(&[
        ("M.lean", "theorem t : True := by\n  trivial\n"),
        (
            "bp.tex",
            "\\begin{lemma}\\label{lem:t}\\lean{t}\\leanok\nTrue holds.\n\\end{lemma}\n",
        ),
    ]);
    let o = archforge(d.path(), &["convert", "--blueprint", "bp.tex", "--dry-run"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("dry run"));
    assert!(stdout(&o).contains("@[blueprint \"lem:t\""));
    assert!(!fs::read_to_string(d.path().join("M.lean"))
        .unwrap()
        .contains("blueprint"));

    assert_eq!(
        code(&archforge(d.path(), &["convert", "--blueprint", "bp.tex"])),
        0
    );
    let lean = fs::read_to_string(d.path().join("M.lean")).unwrap();
    assert!(lean.contains("latexEnv := \"lemma\""));
    let o = archforge(d.path(), &["status", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["totalNodes"], 1);
}

#[test]
fn convert_requires_blueprint() {
    let d = project(&[]);
    assert_eq!(code(&archforge(d.path(), &["convert"])), 2);
}
