//! Golden-file checks: reports are bit-stable for fixed options.
//!
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p jetlie --test golden`.

use jetlie::report::{run_suite, SuiteOptions};
use std::path::PathBuf;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn check_golden(suite: &str, file: &str) {
    let opts = SuiteOptions {
        trials: 10,
        ..SuiteOptions::default()
    };
    let rendered = run_suite(suite, &opts).unwrap().to_json() + "\n";
    let path = golden_path(file);
    if std::env::var("UPDATE_GOLDEN").is_ok() {
        std::fs::write(&path, &rendered).unwrap();
    }
    let stored = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(
        rendered,
        stored,
        "report for suite '{suite}' drifted from {}; run with UPDATE_GOLDEN=1 if intended",
        path.display()
    );
}

#[test]
fn dictionary_report_matches_golden() {
    check_golden("dictionary", "dictionary.json");
}

#[test]
fn theorem1_report_matches_golden() {
    check_golden("theorem1", "theorem1.json");
}

#[test]
fn reports_are_run_to_run_deterministic() {
    let opts = SuiteOptions {
        trials: 10,
        ..SuiteOptions::default()
    };
    let a = run_suite("conditional-invariants", &opts)
        .unwrap()
        .to_json();
    let b = run_suite("conditional-invariants", &opts)
        .unwrap()
        .to_json();
    assert_eq!(a, b);
}
