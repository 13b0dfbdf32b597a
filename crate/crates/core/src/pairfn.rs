//! Pair functions `c_p t_p^k - c_m t_m^k` and their characteristic points.
//!
//! All coefficients are stored positive with the sign made explicit, and
//! both bases lie in `(0, 1)`. A pair is *high* (HPF) when the positive
//! term is the strong one (`t_p > t_m`) and *low* (LPF) otherwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expsum::{ExpSum, ExpTerm};
use crate::scalar::Scalar;

/// Highest derivative order accepted by [`PairFunction::characteristic_point`].
pub const MAX_DERIVATIVE_ORDER: u32 = 64;

/// Smallest accepted `|ln(t_p / t_m)|`; the closed forms divide by it.
pub const MIN_LOG_BASE_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PairError {
    #[error("{field} must be > 0, got {value}")]
    NonPositiveCoefficient { field: &'static str, value: f64 },
    #[error("{field} must lie in (0, 1), got {value}")]
    BaseOutOfRange { field: &'static str, value: f64 },
    #[error("bases t_p = {t_p} and t_m = {t_m} are too close to define a pair")]
    BasesTooClose { t_p: f64, t_m: f64 },
    #[error("derivative order {0} exceeds the cap of {MAX_DERIVATIVE_ORDER}")]
    OrderTooLarge(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Hpf,
    Lpf,
}

impl PairKind {
    pub fn opposite(self) -> Self {
        match self {
            PairKind::Hpf => PairKind::Lpf,
            PairKind::Lpf => PairKind::Hpf,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawPair<S> {
    c_p: S,
    t_p: S,
    c_m: S,
    t_m: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawPair<S>",
    into = "RawPair<S>",
    bound(
        serialize = "S: Scalar + Serialize",
        deserialize = "S: Scalar + Deserialize<'de>"
    )
)]
pub struct PairFunction<S> {
    c_p: S,
    t_p: S,
    c_m: S,
    t_m: S,
    kind: PairKind,
}

/// Zero, extremum and inflection abscissae of one pair function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPoints<S> {
    pub zero: S,
    pub extremum: S,
    pub inflection: S,
}

impl<S: Scalar> PairFunction<S> {
    /// Classifies and validates a pair.
    pub fn new(c_p: S, t_p: S, c_m: S, t_m: S) -> Result<Self, PairError> {
        check_coefficient("c_p", c_p)?;
        check_base("t_p", t_p)?;
        check_coefficient("c_m", c_m)?;
        check_base("t_m", t_m)?;
        if (t_p / t_m).ln().abs() < S::lit(MIN_LOG_BASE_SEPARATION) {
            return Err(PairError::BasesTooClose {
                t_p: t_p.as_f64(),
                t_m: t_m.as_f64(),
            });
        }
        let kind = if t_p > t_m {
            PairKind::Hpf
        } else {
            PairKind::Lpf
        };
        Ok(Self {
            c_p,
            t_p,
            c_m,
            t_m,
            kind,
        })
    }

    #[inline]
    pub fn c_p(&self) -> S {
        self.c_p
    }
    #[inline]
    pub fn t_p(&self) -> S {
        self.t_p
    }
    #[inline]
    pub fn c_m(&self) -> S {
        self.c_m
    }
    #[inline]
    pub fn t_m(&self) -> S {
        self.t_m
    }
    #[inline]
    pub fn kind(&self) -> PairKind {
        self.kind
    }

    /// The same pair with a different positive coefficient.
    pub fn with_c_p(&self, c_p: S) -> Result<Self, PairError> {
        Self::new(c_p, self.t_p, self.c_m, self.t_m)
    }

    /// The same pair with a different negative coefficient.
    pub fn with_c_m(&self, c_m: S) -> Result<Self, PairError> {
        Self::new(self.c_p, self.t_p, c_m, self.t_m)
    }

    pub fn pi_term(&self) -> ExpTerm<S> {
        ExpTerm::new(self.c_p, self.t_p).expect("validated pair")
    }

    pub fn mi_term(&self) -> ExpTerm<S> {
        ExpTerm::new(-self.c_m, self.t_m).expect("validated pair")
    }

    /// `{(c_p, t_p), (-c_m, t_m)}`.
    pub fn as_expsum(&self) -> ExpSum<S> {
        ExpSum::new(vec![self.pi_term(), self.mi_term()])
    }

    pub fn evaluate(&self, k: S) -> S {
        self.c_p * self.t_p.powf(k) - self.c_m * self.t_m.powf(k)
    }

    /// Value of the `order`-th derivative at `k`.
    pub fn derivative_at(&self, order: u32, k: S) -> S {
        let lp = self.t_p.ln();
        let lm = self.t_m.ln();
        let (mut a, mut b) = (self.c_p, self.c_m);
        for _ in 0..order {
            a = a * lp;
            b = b * lm;
        }
        a * self.t_p.powf(k) - b * self.t_m.powf(k)
    }

    /// Magnitude of the larger of the two terms of the `order`-th derivative
    /// at `k`. The terms cancel exactly at a characteristic point, so this is
    /// the scale vanishing checks are measured against.
    pub fn derivative_term_scale(&self, order: u32, k: S) -> S {
        let wp = self.t_p.ln().abs().powi(order as i32);
        let wm = self.t_m.ln().abs().powi(order as i32);
        (self.c_p * wp * self.t_p.powf(k)).max(self.c_m * wm * self.t_m.powf(k))
    }

    #[inline]
    fn log_base_ratio(&self) -> S {
        (self.t_p / self.t_m).ln()
    }

    /// Where the pair crosses the abscissa: `ln(c_m / c_p) / ln(t_p / t_m)`.
    pub fn zero_point(&self) -> S {
        (self.c_m / self.c_p).ln() / self.log_base_ratio()
    }

    /// The single extremum: a maximum for an HPF, a minimum for an LPF.
    pub fn extremum_point(&self) -> S {
        ((self.c_m * self.t_m.ln()) / (self.c_p * self.t_p.ln())).ln() / self.log_base_ratio()
    }

    pub fn inflection_point(&self) -> S {
        let lm = self.t_m.ln();
        let lp = self.t_p.ln();
        ((self.c_m * lm * lm) / (self.c_p * lp * lp)).ln() / self.log_base_ratio()
    }

    /// Zero of the `order`-th derivative:
    /// `[ln(c_m / c_p) + j ln(ln t_m / ln t_p)] / ln(t_p / t_m)`.
    pub fn characteristic_point(&self, order: u32) -> Result<S, PairError> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(PairError::OrderTooLarge(order));
        }
        Ok(self.characteristic_point_unchecked(order))
    }

    pub(crate) fn characteristic_point_unchecked(&self, order: u32) -> S {
        match order {
            0 => self.zero_point(),
            1 => self.extremum_point(),
            2 => self.inflection_point(),
            j => {
                let j = S::from_u32(j).expect("small integer");
                ((self.c_m / self.c_p).ln() + j * (self.t_m.ln() / self.t_p.ln()).ln())
                    / self.log_base_ratio()
            }
        }
    }

    pub fn characteristic_points(&self) -> CharacteristicPoints<S> {
        CharacteristicPoints {
            zero: self.zero_point(),
            extremum: self.extremum_point(),
            inflection: self.inflection_point(),
        }
    }

    /// First derivative rewritten with positive coefficients. The logarithms
    /// are negative, so the terms swap roles and the kind flips.
    pub fn first_derivative(&self) -> Result<Self, PairError> {
        Self::new(
            self.c_m * self.t_m.ln().abs(),
            self.t_m,
            self.c_p * self.t_p.ln().abs(),
            self.t_p,
        )
    }
}

fn check_coefficient<S: Scalar>(field: &'static str, v: S) -> Result<(), PairError> {
    if v.is_finite() && v > S::zero() {
        Ok(())
    } else {
        Err(PairError::NonPositiveCoefficient {
            field,
            value: v.as_f64(),
        })
    }
}

fn check_base<S: Scalar>(field: &'static str, v: S) -> Result<(), PairError> {
    if v > S::zero() && v < S::one() {
        Ok(())
    } else {
        Err(PairError::BaseOutOfRange {
            field,
            value: v.as_f64(),
        })
    }
}

impl<S: Scalar> TryFrom<RawPair<S>> for PairFunction<S> {
    type Error = PairError;
    fn try_from(r: RawPair<S>) -> Result<Self, Self::Error> {
        PairFunction::new(r.c_p, r.t_p, r.c_m, r.t_m)
    }
}

impl<S: Scalar> From<PairFunction<S>> for RawPair<S> {
    fn from(p: PairFunction<S>) -> Self {
        RawPair {
            c_p: p.c_p,
            t_p: p.t_p,
            c_m: p.c_m,
            t_m: p.t_m,
        }
    }
}
