//! Programmatic access to the verification suites and their
//! machine-readable reports.
//!
//! Run with `cargo run --example suite_reports`.

use jetlie::report::{run_suite, SuiteOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SuiteOptions {
        trials: 10,
        ..SuiteOptions::default()
    };
    let report = run_suite("theorem1", &opts)?;
    print!("{}", report.to_human());

    // The same report serializes to stable JSON for golden-file testing.
    let json = run_suite("dictionary", &opts)?.to_json();
    println!("dictionary report is {} bytes of JSON", json.len());
    assert!(run_suite("dictionary", &opts)?.to_json() == json);
    Ok(())
}
