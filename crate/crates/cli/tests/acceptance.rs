//! The acceptance suite: one PASS/FAIL line per criterion, non-zero exit
//! if any criterion fails.

use std::process::ExitCode;

use lyastep::acceptance::{run_suite, Tolerances, DEFAULT_SEED};

fn main() -> ExitCode {
    let reports = run_suite(None, &Tolerances::default(), DEFAULT_SEED);
    assert_eq!(reports.len(), 11);
    for r in &reports {
        println!("{}", r.line());
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} {}", r.id, r.key))
        .collect();
    println!(
        "acceptance: {} passed, {} failed",
        reports.len() - failed.len(),
        failed.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
