use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

fn ucrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucrc"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn m(name: &str) -> String {
    models().join(name).display().to_string()
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&ucrc(&["check", &m("wg.manifest")])), 0);
    assert_eq!(code(&ucrc(&["check", &m("wg_real.ocl")])), 0);
    assert_eq!(code(&ucrc(&["check", &m("no_such.manifest")])), 3);
    let bad = ucrc(&["check", &m("undeclared_read.ocl")]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("status=fail"));
}

#[test]
fn unknown_flag_is_invalid() {
    assert_eq!(code(&ucrc(&["emulate", &m("wg.manifest"), "--bogus"])), 2);
}

#[test]
fn emulate_wireguard_passes() {
    let o = ucrc(&["emulate", &m("wg.manifest"), "--grid", "1..2"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.starts_with("# ucrc report\n"));
    assert!(out.contains("check=emulate:dummy status=pass"));
}

#[test]
fn emulate_ceiling() {
    assert_eq!(
        code(&ucrc(&["emulate", &m("wg.manifest"), "--grid", "1..8"])),
        4
    );
}

#[test]
fn leaky_counterexample_replays() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display().to_string();
    let o = ucrc(&[
        "emulate",
        &m("wg_broken.manifest"),
        "--grid",
        "1..2",
        "--out",
        &d,
    ]);
    assert_eq!(code(&o), 1);
    let cx = dir.path().join("counterexample-dummy.txt");
    assert!(dir.path().join("report.txt").exists());
    assert!(dir.path().join("profile-dummy.csv").exists());

    let r = ucrc(&["replay", &cx.display().to_string()]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stdout));
    assert!(String::from_utf8_lossy(&r.stdout).contains("matches=true"));

    let text = std::fs::read_to_string(&cx).unwrap();
    let tampered = dir.path().join("tampered.txt");
    std::fs::write(&tampered, text.replace("advantage 15/16", "advantage 1/16")).unwrap();
    assert_eq!(code(&ucrc(&["replay", &tampered.display().to_string()])), 1);

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&ucrc(&["replay", &empty.display().to_string()])), 3);
}

#[test]
fn compiler_check_identity() {
    let o = ucrc(&["compiler-check", &m("toy.manifest"), "--equiv", "perfect"]);
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{out}");
    assert!(out.contains("check=rhc status=pass"));
}
