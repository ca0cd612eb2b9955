//! One line per acceptance criterion. All comparisons are exact.

use std::process::ExitCode;

use workbench::config::RunConfig;
use workbench::suites::run_all;

fn main() -> ExitCode {
    let reports = match run_all(&RunConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL all criteria: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let mut failed = Vec::new();
    for (suite, report) in &reports {
        let k = suite.criterion();
        let bad: Vec<_> = report.failures().collect();
        if report.records.is_empty() || !bad.is_empty() {
            println!("FAIL criterion {k}: {} ({} of {} records failed)", suite.name(), bad.len(), report.records.len());
            for r in bad.iter().take(5) {
                println!("    {}", serde_json::to_string(r).unwrap());
            }
            failed.push(k);
        } else {
            println!("PASS criterion {k}: {} ({} records)", suite.name(), report.records.len());
        }
    }
    let covered: Vec<usize> = reports.iter().map(|(s, _)| s.criterion()).collect();
    if covered != (1..=11).collect::<Vec<_>>() {
        println!("FAIL coverage: criteria run {covered:?}");
        return ExitCode::FAILURE;
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
