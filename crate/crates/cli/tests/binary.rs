//! Exit codes and output of the `poro` executable.

use std::process::Command;

fn poro() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poro"))
}

#[test]
fn run_subcommand_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = poro()
        .args(["run", "--set", "n=2", "--set", "steps=1", "--output"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("history.csv").exists());
    assert!(dir.path().join("history.csv.meta").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("wrote"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let out = poro().args(["run", "--set", "k=9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.toml");
    std::fs::write(&file, "mu = 1\nwhat = 2\n").unwrap();
    let out = poro().args(["run", "--config"]).arg(&file).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
