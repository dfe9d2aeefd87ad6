use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ir::Expression;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: String,
    pub name: String,
    pub expr: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Assertion {
    pub what: String,
    pub passed: bool,
    pub residual: String,
}

/// Outcome of one scripted check. `status` is pass iff every assertion
/// holds; `residual` is the canonical residual of the first failing
/// zero-assertion, or "0".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub status: Status,
    pub residual: String,
    pub trace: Vec<TraceStep>,
    pub assertions: Vec<Assertion>,
    pub metadata: BTreeMap<String, String>,
    #[serde(skip)]
    pub claimed_zero: Vec<Expression>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Merged document written by `verify`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub tool: String,
    pub version: String,
    /// Command line that produced the document, when run from the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub table: String,
    pub all_passed: bool,
    pub checks: BTreeMap<String, Report>,
}
