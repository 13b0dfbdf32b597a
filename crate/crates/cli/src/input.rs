//! The JSON input document: a sum or a cash-flow schedule plus options.

use std::fmt;

use expsum::{CashFlow, CashFlowSchedule, ExpSum, ExpTerm};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermInput {
    pub c: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowInput {
    pub amount: f64,
    pub time_remaining: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermInput>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub begin_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flows: Option<Vec<FlowInput>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A problem with the input, annotated with where it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn at(path: &str, message: impl fmt::Display) -> InputError {
    InputError(format!("{path}: {message}"))
}

/// What the document describes once validated.
#[derive(Debug, Clone)]
pub enum Subject {
    Sum(ExpSum<f64>),
    Schedule(CashFlowSchedule<f64>),
}

impl InputDocument {
    pub fn parse(source: &str, text: &str) -> Result<Self, InputError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| at(source, e))?;
        doc.validate_options(source)?;
        Ok(doc)
    }

    fn validate_options(&self, source: &str) -> Result<(), InputError> {
        if let Some([lo, hi]) = self.window {
            if !(lo < hi) {
                return Err(at(
                    source,
                    format!("window: lower end {lo} is not below {hi}"),
                ));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(at(source, format!("tol: {tol} is not positive")));
            }
        }
        Ok(())
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        self.window.map(|[lo, hi]| (lo, hi))
    }

    fn is_schedule(&self) -> bool {
        self.begin_value.is_some()
            || self.end_value.is_some()
            || self.horizon.is_some()
            || self.flows.is_some()
    }

    pub fn subject(&self, source: &str) -> Result<Subject, InputError> {
        match (&self.terms, self.is_schedule()) {
            (Some(_), true) => Err(at(
                source,
                "give either terms or a schedule (begin_value, end_value, flows), not both",
            )),
            (None, false) => Err(at(
                source,
                "missing input: expected terms or a schedule (begin_value, end_value, flows)",
            )),
            (Some(terms), false) => self.sum_from(source, terms).map(Subject::Sum),
            (None, true) => self.schedule(source).map(Subject::Schedule),
        }
    }

    fn sum_from(&self, source: &str, terms: &[TermInput]) -> Result<ExpSum<f64>, InputError> {
        terms
            .iter()
            .enumerate()
            .map(|(i, term)| {
                ExpTerm::new(term.c, term.t).map_err(|e| at(&format!("{source}: terms[{i}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ExpSum::new)
    }

    pub fn sum(&self, source: &str) -> Result<ExpSum<f64>, InputError> {
        match self.subject(source)? {
            Subject::Sum(s) => Ok(s),
            Subject::Schedule(_) => Err(at(source, "this command needs terms, not a schedule")),
        }
    }

    pub fn schedule(&self, source: &str) -> Result<CashFlowSchedule<f64>, InputError> {
        if self.terms.is_some() {
            return Err(at(source, "this command needs a schedule, not terms"));
        }
        let begin = self
            .begin_value
            .ok_or_else(|| at(source, "begin_value is missing"))?;
        let end = self
            .end_value
            .ok_or_else(|| at(source, "end_value is missing"))?;
        let flows = self
            .flows
            .iter()
            .flatten()
            .map(|f| CashFlow {
                amount: f.amount,
                time_remaining: f.time_remaining,
            })
            .collect();
        CashFlowSchedule::new(begin, end, self.horizon, flows).map_err(|e| at(source, e))
    }
}

/// Parses `lo:hi`.
pub fn parse_window(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {text:?}"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|e| format!("lower end {lo:?}: {e}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|e| format!("upper end {hi:?}: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("window {lo}:{hi} must be finite with lo < hi"));
    }
    Ok((lo, hi))
}

/// Parses a comma-separated list of `c:t` terms.
pub fn parse_terms(text: &str) -> Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|item| {
            let (c, t) = item
                .split_once(':')
                .ok_or_else(|| format!("expected c:t, got {item:?}"))?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|e| format!("coefficient {c:?}: {e}"))?;
            let t: f64 = t.trim().parse().map_err(|e| format!("base {t:?}: {e}"))?;
            Ok((c, t))
        })
        .collect()
}
