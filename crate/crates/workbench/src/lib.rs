//! Configuration, verification suites and report writers on top of
//! `wb_core`.

pub mod commands;
pub mod config;
pub mod report;
pub mod hecke_expr;
pub mod suites;

use anyhow::Result;

use config::RunConfig;
use report::Report;
use suites::Suite;

/// `verify` with `suite` unset or `all` runs every suite.
pub fn verify(cfg: &RunConfig) -> Result<Report> {
    match cfg.suite.as_deref().and_then(Suite::parse) {
        Some(s) => suites::run(s, cfg),
        None => {
            let mut records = Vec::new();
            for (_, r) in suites::run_all(cfg)? {
                records.extend(r.records);
            }
            Ok(Report { records })
        }
    }
}
