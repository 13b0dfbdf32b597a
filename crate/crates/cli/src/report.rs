//! Report documents written to standard output.

use std::fmt::Write as _;

use expsum::{
    ClaimReport, ExpTerm, IrrSolution, PairFunction, RootReport, SplitResult, SyncResult,
};
use serde::{Deserialize, Serialize};

use crate::input::InputDocument;

/// The pairs built from the input, the terms left out of any pair, and the
/// synchronized result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    pub pairs: Vec<PairFunction<f64>>,
    pub unpaired: Vec<ExpTerm<f64>>,
    pub result: SyncResult<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "report", rename_all = "lowercase")]
pub enum Report {
    Analyze(RootReport<f64>),
    Sync(SyncReport),
    Split(SplitResult<f64>),
    Irr(IrrSolution<f64>),
    Claimcheck(Vec<ClaimReport<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputDocument>,
    #[serde(flatten)]
    pub report: Report,
}

impl ReportDocument {
    pub fn new(input: Option<InputDocument>, report: Report) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            input,
            report,
        }
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// `k,value` rows under a header.
pub fn emit_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("k,value\n");
    for (k, v) in samples {
        writeln!(out, "{k},{v}").expect("writing to a string");
    }
    out
}
