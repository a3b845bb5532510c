//! End-to-end checks of the command-line interface: exit codes, formats,
//! stdin, catalog addressing, and the seed environment override.

use std::io::Write;
use std::process::{Command, Stdio};

fn jetlie() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jetlie"))
}

#[test]
fn suite_exit_codes() {
    let out = jetlie()
        .args([
            "suite",
            "dictionary",
            "--trials",
            "5",
            "--format",
            "structured",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["suite"], "dictionary");
    assert_eq!(report["passed"], true);

    let out = jetlie().args(["suite", "no-such-suite"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn structured_reports_are_deterministic() {
    let run = || {
        jetlie()
            .args([
                "suite",
                "theorem1",
                "--trials",
                "5",
                "--format",
                "structured",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn check_absolute_and_conditional() {
    let out = jetlie().args(["check", "P0", "u"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("Absolute"));

    // The first conditional invariant, addressed from the catalog, modulo
    // the side condition.
    let out = jetlie()
        .args([
            "check",
            "A1",
            "@cond.I1",
            "--condition",
            "u[0] + u[3] + i*m*u",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("Conditional"));

    // Without the condition the same expression fails, and so does the
    // wave polynomial.
    let out = jetlie().args(["check", "A1", "@cond.I1"]).output().unwrap();
    assert!(!out.status.success());
    let out = jetlie()
        .args(["check", "A1", "-u[0,0]+u[1,1]+u[2,2]+u[3,3]-lambda*u^2*u*"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn expression_from_stdin() {
    let mut child = jetlie()
        .args(["check", "P1", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"u[0] + u[3] + i*m*u")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("Absolute"));
}

#[test]
fn parse_errors_carry_positions() {
    let out = jetlie().args(["check", "P0", "u[0,0"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 6"));
}

#[test]
fn seed_environment_override() {
    let out = jetlie()
        .args(["suite", "independence", "--format", "structured"])
        .env("JETLIE_SEED", "7")
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["options"]["seed"], 7);
}

#[test]
fn catalog_listing() {
    let out = jetlie().args(["catalog"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("galilei.M1"));
    assert!(text.contains("cond.I3"));
    assert!(text.contains("A1"));
}
