//! Internal rate of return: `E = sum_j C_j (1 + R)^{T_j}`.
//!
//! With `x = ln(1 + R)` each flow becomes a term `C_j (e^{T_j})^x`, so every
//! rate is a root of an exponential sum and the root isolation in
//! [`crate::roots`] finds all of them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expsum::{CoreError, ExpSum, ExpTerm};
use crate::roots::{isolate_roots, sign_change_bound, Crossing, RootError};
use crate::scalar::{compensated_sum, Scalar};

/// Default search window for rates.
pub const DEFAULT_RATE_WINDOW: (f64, f64) = (-0.999999, 10.0);
/// Solution count the published analysis allows.
pub const PUBLISHED_RATE_BOUND: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IrrError {
    #[error("{field} must be finite and nonnegative, got {value}")]
    NegativeValue { field: &'static str, value: f64 },
    #[error("flow {index} has a non-finite amount {value}")]
    NonFiniteAmount { index: usize, value: f64 },
    #[error("flow {index} has time remaining {time} outside [0, {horizon}]")]
    TimeOutOfRange {
        index: usize,
        time: f64,
        horizon: f64,
    },
    #[error("a schedule with a begin value and no flows needs an explicit horizon")]
    MissingHorizon,
    #[error("rate {0} is outside the domain R > -1")]
    RateOutOfDomain(f64),
    #[error("rate window ({lo}, {hi}) must satisfy -1 < lo < hi < inf")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CashFlow<S> {
    pub amount: S,
    pub time_remaining: S,
}

/// Begin value, end value and intermediate flows over one period.
///
/// The begin value is itself a flow with time remaining equal to the
/// horizon. Without an explicit horizon the largest flow time is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawSchedule<S>",
    into = "RawSchedule<S>",
    bound(
        serialize = "S: Scalar + Serialize",
        deserialize = "S: Scalar + Deserialize<'de>"
    )
)]
pub struct CashFlowSchedule<S: Scalar> {
    begin_value: S,
    end_value: S,
    horizon: S,
    flows: Vec<CashFlow<S>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSchedule<S> {
    begin_value: S,
    end_value: S,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<S>,
    #[serde(default)]
    flows: Vec<CashFlow<S>>,
}

impl<S: Scalar> TryFrom<RawSchedule<S>> for CashFlowSchedule<S> {
    type Error = IrrError;

    fn try_from(raw: RawSchedule<S>) -> Result<Self, IrrError> {
        Self::new(raw.begin_value, raw.end_value, raw.horizon, raw.flows)
    }
}

impl<S: Scalar> From<CashFlowSchedule<S>> for RawSchedule<S> {
    fn from(s: CashFlowSchedule<S>) -> Self {
        Self {
            begin_value: s.begin_value,
            end_value: s.end_value,
            horizon: Some(s.horizon),
            flows: s.flows,
        }
    }
}

impl<S: Scalar> CashFlowSchedule<S> {
    pub fn new(
        begin_value: S,
        end_value: S,
        horizon: Option<S>,
        flows: Vec<CashFlow<S>>,
    ) -> Result<Self, IrrError> {
        for (field, value) in [("begin_value", begin_value), ("end_value", end_value)] {
            if !(value.is_finite() && value >= S::zero()) {
                return Err(IrrError::NegativeValue {
                    field,
                    value: value.as_f64(),
                });
            }
        }
        if let Some(h) = horizon {
            if !(h.is_finite() && h >= S::zero()) {
                return Err(IrrError::NegativeValue {
                    field: "horizon",
                    value: h.as_f64(),
                });
            }
        }
        let latest = flows
            .iter()
            .map(|f| f.time_remaining)
            .fold(S::zero(), |a, b| if b > a { b } else { a });
        let horizon = match horizon {
            Some(h) => h,
            None if flows.is_empty() && begin_value > S::zero() => {
                return Err(IrrError::MissingHorizon)
            }
            None => latest,
        };
        for (index, f) in flows.iter().enumerate() {
            if !f.amount.is_finite() {
                return Err(IrrError::NonFiniteAmount {
                    index,
                    value: f.amount.as_f64(),
                });
            }
            let t = f.time_remaining;
            if !(t.is_finite() && t >= S::zero() && t <= horizon) {
                return Err(IrrError::TimeOutOfRange {
                    index,
                    time: t.as_f64(),
                    horizon: horizon.as_f64(),
                });
            }
        }
        Ok(Self {
            begin_value,
            end_value,
            horizon,
            flows,
        })
    }

    pub fn begin_value(&self) -> S {
        self.begin_value
    }

    pub fn end_value(&self) -> S {
        self.end_value
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn flows(&self) -> &[CashFlow<S>] {
        &self.flows
    }

    pub fn with_end_value(&self, end_value: S) -> Result<Self, IrrError> {
        Self::new(
            self.begin_value,
            end_value,
            Some(self.horizon),
            self.flows.clone(),
        )
    }

    /// All flows with the begin value folded in as the first one.
    pub fn folded_flows(&self) -> Vec<CashFlow<S>> {
        let mut out = Vec::with_capacity(self.flows.len() + 1);
        if self.begin_value > S::zero() {
            out.push(CashFlow {
                amount: self.begin_value,
                time_remaining: self.horizon,
            });
        }
        out.extend_from_slice(&self.flows);
        out
    }

    /// `begin_value + sum |amount| + end_value`, the scale residuals are
    /// measured against.
    pub fn scale(&self) -> S {
        self.begin_value
            + compensated_sum(self.flows.iter().map(|f| f.amount.abs()))
            + self.end_value
    }
}

/// The schedule as a sum in `x = ln(1 + R)`: one term `(C_j, e^{T_j})` per
/// flow and `(-E, 1)` for the end value.
pub fn schedule_to_expsum<S: Scalar>(s: &CashFlowSchedule<S>) -> Result<ExpSum<S>, IrrError> {
    let mut terms = s
        .folded_flows()
        .iter()
        .filter(|f| f.amount != S::zero())
        .map(|f| ExpTerm::new(f.amount, f.time_remaining.exp()))
        .collect::<Result<Vec<_>, _>>()?;
    if s.end_value > S::zero() {
        terms.push(ExpTerm::new(-s.end_value, S::one())?);
    }
    Ok(ExpSum::new(terms))
}

/// `E(R) = sum_j C_j (1 + R)^{T_j}` with the begin value folded in.
pub fn irr_evaluate<S: Scalar>(s: &CashFlowSchedule<S>, rate: S) -> Result<S, IrrError> {
    if !(rate.is_finite() && rate > -S::one()) {
        return Err(IrrError::RateOutOfDomain(rate.as_f64()));
    }
    let x = rate.ln_1p();
    Ok(compensated_sum(
        s.folded_flows()
            .iter()
            .map(|f| f.amount * (f.time_remaining * x).exp()),
    ))
}

/// How the number of rates found compares with the available bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityNote {
    pub found: usize,
    /// Sign alternations of the time-ordered coefficients, end value
    /// included; no schedule has more rates than this.
    pub sign_change_bound: usize,
    pub published_bound: usize,
    pub exceeds_published_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Scalar + Serialize",
    deserialize = "S: Scalar + Deserialize<'de>"
))]
pub struct IrrSolution<S> {
    pub rates: Vec<S>,
    /// `|E(R) - end_value|` for each rate.
    pub residuals: Vec<S>,
    /// Rates where `E(R)` touches the end value without crossing it.
    pub tangential: Vec<S>,
    /// The middle rate when exactly three are found.
    pub conventional: Option<S>,
    pub window: (S, S),
    pub multiplicity_note: MultiplicityNote,
}

/// Every rate in the window solving the schedule's equation.
pub fn irr_solve<S: Scalar>(
    s: &CashFlowSchedule<S>,
    window: Option<(S, S)>,
    tol: S,
) -> Result<IrrSolution<S>, IrrError> {
    let (lo, hi) = window.unwrap_or((S::lit(DEFAULT_RATE_WINDOW.0), S::lit(DEFAULT_RATE_WINDOW.1)));
    if !(lo > -S::one() && hi.is_finite() && lo < hi) {
        return Err(IrrError::InvalidWindow {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let sum = schedule_to_expsum(s)?;
    let roots = isolate_roots(&sum, (lo.ln_1p(), hi.ln_1p()), tol)?;
    let rates: Vec<S> = roots.iter().map(|r| r.at.exp_m1()).collect();
    let residuals = rates
        .iter()
        .map(|&r| Ok((irr_evaluate(s, r)? - s.end_value).abs()))
        .collect::<Result<Vec<S>, IrrError>>()?;
    let tangential = roots
        .iter()
        .filter(|r| r.crossing == Crossing::Touching)
        .map(|r| r.at.exp_m1())
        .collect();
    let found = rates.len();
    Ok(IrrSolution {
        conventional: (found == 3).then(|| rates[1]),
        rates,
        residuals,
        tangential,
        window: (lo, hi),
        multiplicity_note: MultiplicityNote {
            found,
            sign_change_bound: sign_change_bound(&sum),
            published_bound: PUBLISHED_RATE_BOUND,
            exceeds_published_bound: found > PUBLISHED_RATE_BOUND,
        },
    })
}

/// `a_k = sum_j C_j T_j^k / k!` for `k = 0..=k_max`, the Taylor coefficients
/// of `E` in `x`. The end value is not included.
pub fn taylor_coefficients<S: Scalar>(s: &CashFlowSchedule<S>, k_max: usize) -> Vec<S> {
    let flows = s.folded_flows();
    let mut terms: Vec<S> = flows.iter().map(|f| f.amount).collect();
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(compensated_sum(terms.iter().copied()));
    for k in 1..=k_max {
        let kf = S::from_usize(k).expect("small integer");
        for (term, f) in terms.iter_mut().zip(&flows) {
            *term = *term * f.time_remaining / kf;
        }
        out.push(compensated_sum(terms.iter().copied()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignSequence {
    /// Signs of `-E + a'_0, a'_1, ..., a'_{k_max}` with `a'_k = sum_j C_j T_j^k`.
    pub signs: Vec<i8>,
    /// Strict alternations, skipping zeros.
    pub change_count: usize,
}

/// Sign pattern of `-E + a'_0, a'_1, ..., a'_{k_max}`.
pub fn sign_sequence<S: Scalar>(s: &CashFlowSchedule<S>, k_max: usize) -> SignSequence {
    let flows = s.folded_flows();
    let mut powers: Vec<S> = flows.iter().map(|f| f.amount).collect();
    let mut signs = Vec::with_capacity(k_max + 1);
    let sign = |v: S| -> i8 {
        if v > S::zero() {
            1
        } else if v < S::zero() {
            -1
        } else {
            0
        }
    };
    let first = compensated_sum(powers.iter().copied().chain([-s.end_value]));
    signs.push(sign(first));
    for _ in 1..=k_max {
        for (p, f) in powers.iter_mut().zip(&flows) {
            *p = *p * f.time_remaining;
        }
        signs.push(sign(compensated_sum(powers.iter().copied())));
    }
    let nonzero: Vec<i8> = signs.iter().copied().filter(|&x| x != 0).collect();
    let change_count = nonzero.windows(2).filter(|w| w[0] != w[1]).count();
    SignSequence {
        signs,
        change_count,
    }
}
