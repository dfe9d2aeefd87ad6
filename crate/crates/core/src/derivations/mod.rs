//! Scripted derivations and their reports.
//!
//! Each check is a `.drv` script under `scripts/`, embedded at build time.
//! `run_check` interprets one of them against a rule table; `verify_all`
//! runs the whole suite in parallel and merges the reports by name.

pub mod rank;
pub mod report;
pub mod script;

use std::collections::BTreeMap;

pub use report::{Assertion, Report, Status, TraceStep, VerifyDocument};
pub use script::run_script;

use crate::curvature::RuleTable;
use crate::error::{Error, Result};

/// Registered checks in suite order.
pub const CHECKS: [(&str, &str); 10] = [
    ("check_clifford", include_str!("../../scripts/check_clifford.drv")),
    ("check_gamma2", include_str!("../../scripts/check_gamma2.drv")),
    ("translate_rs", include_str!("../../scripts/translate_rs.drv")),
    ("check_irreducible_split", include_str!("../../scripts/check_irreducible_split.drv")),
    ("check_gauge_m0", include_str!("../../scripts/check_gauge_m0.drv")),
    ("check_gauge_m1", include_str!("../../scripts/check_gauge_m1.drv")),
    ("check_space_split", include_str!("../../scripts/check_space_split.drv")),
    ("check_constraint_propagation", include_str!("../../scripts/check_constraint_propagation.drv")),
    ("derive_buchdahl", include_str!("../../scripts/derive_buchdahl.drv")),
    ("check_conclusions", include_str!("../../scripts/check_conclusions.drv")),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Script text of a registered check.
pub fn script_of(name: &str) -> Result<&'static str> {
    CHECKS
        .iter()
        .find(|c| c.0 == name)
        .map(|c| c.1)
        .ok_or_else(|| Error::UnknownCheck(name.to_string()))
}

pub fn run_check(name: &str, table: &RuleTable) -> Result<Report> {
    Ok(run_script(name, script_of(name)?, table))
}

/// Run several checks on worker threads. The result is keyed by name, so
/// the merge order does not depend on scheduling.
pub fn run_checks(names: &[&str], table: &RuleTable) -> Result<BTreeMap<String, Report>> {
    let scripts: Vec<(&str, &str)> = names.iter().map(|n| Ok((*n, script_of(n)?))).collect::<Result<_>>()?;
    let reports = std::thread::scope(|s| {
        let handles: Vec<_> = scripts
            .iter()
            .map(|(n, text)| s.spawn(move || run_script(n, text, table)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect::<Vec<_>>()
    });
    Ok(reports.into_iter().map(|r| (r.check.clone(), r)).collect())
}

pub fn verify_all(table: &RuleTable, table_name: &str) -> VerifyDocument {
    let checks = run_checks(&check_names(), table).expect("registered names");
    document(checks, table_name)
}

pub fn document(checks: BTreeMap<String, Report>, table_name: &str) -> VerifyDocument {
    VerifyDocument {
        tool: "rarita".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: None,
        table: table_name.into(),
        all_passed: checks.values().all(Report::passed),
        checks,
    }
}

/// Re-execute the steps behind `report` and compare every recorded
/// expression byte for byte. Returns the first step that differs.
pub fn replay(report: &Report, table: &RuleTable) -> Result<Option<String>> {
    let again = run_check(&report.check, table)?;
    if again.trace.len() != report.trace.len() {
        return Ok(Some(format!("trace length {} vs {}", again.trace.len(), report.trace.len())));
    }
    for (a, b) in again.trace.iter().zip(&report.trace) {
        if a.name != b.name || a.expr != b.expr {
            return Ok(Some(b.name.clone()));
        }
    }
    if again.residual != report.residual {
        return Ok(Some("residual".into()));
    }
    Ok(None)
}
