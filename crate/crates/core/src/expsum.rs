//! Finite sums of exponential functions `S(k) = sum_j C_j * T_j^k`.
//!
//! An [`ExpSum`] is always kept canonical: bases strictly descending, equal
//! bases merged, zero coefficients dropped. Bases are compared exactly.

use std::cmp::Ordering;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{compensated_sum, log_domain_sum, CompensatedSum, LogMagnitude, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("term {index}: base must be finite and > 0, got {value}")]
    InvalidBase { index: usize, value: f64 },
    #[error("term {index}: coefficient must be finite, got {value}")]
    NonFiniteCoefficient { index: usize, value: f64 },
    #[error("term {term} overflows at k = {k}")]
    Range { term: usize, k: f64 },
    #[error("abscissa must be finite, got {0}")]
    NonFiniteAbscissa(f64),
    #[error("operation requires a non-empty sum")]
    Empty,
    #[error("normalization offset must be finite and > 0, got {0}")]
    InvalidDelta(f64),
    #[error("term {index}: logarithm base must be positive and != 1, got {value}")]
    InvalidLogBase { index: usize, value: f64 },
    #[error("length mismatch: {coefficients} coefficients, {bases} bases")]
    LengthMismatch { coefficients: usize, bases: usize },
}

#[derive(Serialize, Deserialize)]
struct RawTerm<S> {
    c: S,
    t: S,
}

/// One signed exponential term `coefficient * base^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawTerm<S>",
    into = "RawTerm<S>",
    bound(
        serialize = "S: Scalar + Serialize",
        deserialize = "S: Scalar + Deserialize<'de>"
    )
)]
pub struct ExpTerm<S> {
    coefficient: S,
    base: S,
}

impl<S: Scalar> ExpTerm<S> {
    pub fn new(coefficient: S, base: S) -> Result<Self, CoreError> {
        Self::checked(0, coefficient, base)
    }

    fn checked(index: usize, coefficient: S, base: S) -> Result<Self, CoreError> {
        if !(base.is_finite() && base > S::zero()) {
            return Err(CoreError::InvalidBase {
                index,
                value: base.as_f64(),
            });
        }
        if !coefficient.is_finite() {
            return Err(CoreError::NonFiniteCoefficient {
                index,
                value: coefficient.as_f64(),
            });
        }
        Ok(Self { coefficient, base })
    }

    #[inline]
    pub fn coefficient(&self) -> S {
        self.coefficient
    }

    #[inline]
    pub fn base(&self) -> S {
        self.base
    }

    #[inline]
    pub fn value_at(&self, k: S) -> S {
        self.coefficient * self.base.powf(k)
    }

    /// `(sign, ln|C * T^k|)`, finite wherever the plain value would overflow.
    #[inline]
    pub(crate) fn log_value_at(&self, k: S) -> (i8, S) {
        let lm = LogMagnitude::from_value(self.coefficient);
        (lm.sign, lm.log_mag + k * self.base.ln())
    }
}

impl<S: Scalar> TryFrom<RawTerm<S>> for ExpTerm<S> {
    type Error = CoreError;
    fn try_from(raw: RawTerm<S>) -> Result<Self, Self::Error> {
        ExpTerm::new(raw.c, raw.t)
    }
}

impl<S: Scalar> From<ExpTerm<S>> for RawTerm<S> {
    fn from(t: ExpTerm<S>) -> Self {
        RawTerm {
            c: t.coefficient,
            t: t.base,
        }
    }
}

/// A term whose abscissa is shifted: `coefficient * base^(k - shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedTerm<S> {
    pub coefficient: S,
    pub base: S,
    pub shift: S,
}

/// Canonical finite sum of exponential terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(
    try_from = "Vec<ExpTerm<S>>",
    into = "Vec<ExpTerm<S>>",
    bound(
        serialize = "S: Scalar + Serialize",
        deserialize = "S: Scalar + Deserialize<'de>"
    )
)]
pub struct ExpSum<S> {
    terms: Vec<ExpTerm<S>>,
}

/// Value of a sum measured against its own term magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue<S> {
    /// `S(k) / sum_j |C_j T_j^k|`, in `[-1, 1]`.
    pub relative: S,
    /// `ln sum_j |C_j T_j^k|`.
    pub log_scale: S,
}

impl<S: Scalar> ExpSum<S> {
    pub fn empty() -> Self {
        Self { terms: Vec::new() }
    }

    /// Validates and canonicalizes an arbitrary term list.
    pub fn new(terms: Vec<ExpTerm<S>>) -> Self {
        merge_terms(&terms)
    }

    /// Builds a sum from `(coefficient, base)` pairs, validating each.
    pub fn from_pairs(pairs: &[(S, S)]) -> Result<Self, CoreError> {
        let terms = pairs
            .iter()
            .enumerate()
            .map(|(i, &(c, t))| ExpTerm::checked(i, c, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(merge_terms(&terms))
    }

    pub fn single(coefficient: S, base: S) -> Result<Self, CoreError> {
        Self::from_pairs(&[(coefficient, base)])
    }

    #[inline]
    pub fn terms(&self) -> &[ExpTerm<S>] {
        &self.terms
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = S> + '_ {
        self.terms.iter().map(|t| t.coefficient)
    }

    pub fn bases(&self) -> impl Iterator<Item = S> + '_ {
        self.terms.iter().map(|t| t.base)
    }

    /// Largest base (the strong term), if any.
    pub fn strongest(&self) -> Option<&ExpTerm<S>> {
        self.terms.first()
    }

    /// Smallest base (the weak term), if any.
    pub fn weakest(&self) -> Option<&ExpTerm<S>> {
        self.terms.last()
    }

    /// `sum_j C_j T_j^k`, summed in descending-base order with compensation.
    pub fn evaluate(&self, k: S) -> Result<S, CoreError> {
        if !k.is_finite() {
            return Err(CoreError::NonFiniteAbscissa(k.as_f64()));
        }
        let mut acc = CompensatedSum::new();
        let mut peak: Option<(usize, S)> = None;
        for (i, term) in self.terms.iter().enumerate() {
            let v = term.value_at(k);
            if !v.is_finite() {
                return Err(CoreError::Range {
                    term: i,
                    k: k.as_f64(),
                });
            }
            if peak.is_none_or(|(_, m)| v.abs() > m) {
                peak = Some((i, v.abs()));
            }
            acc.add(v);
        }
        let value = acc.value();
        match (value.is_finite(), peak) {
            (true, _) => Ok(value),
            (false, Some((term, _))) => Err(CoreError::Range {
                term,
                k: k.as_f64(),
            }),
            (false, None) => Ok(S::zero()),
        }
    }

    /// `sum_j |C_j T_j^k|`; infinite when it overflows.
    pub fn term_scale(&self, k: S) -> S {
        compensated_sum(self.terms.iter().map(|t| t.value_at(k).abs()))
    }

    /// Overflow-free evaluation relative to the local term scale.
    ///
    /// The empty sum reports a relative value of zero and a log scale of
    /// negative infinity.
    pub fn evaluate_scaled(&self, k: S) -> ScaledValue<S> {
        // Direct evaluation is the more accurate path; fall back to the log
        // domain when any term leaves the representable range.
        let mut signed = CompensatedSum::new();
        let mut absolute = CompensatedSum::new();
        let mut direct_ok = true;
        for t in &self.terms {
            let v = t.value_at(k);
            if !v.is_finite() || v == S::zero() {
                direct_ok = false;
                break;
            }
            signed.add(v);
            absolute.add(v.abs());
        }
        if direct_ok && !self.terms.is_empty() {
            let a = absolute.value();
            if a.is_finite() && a > S::min_positive_value() {
                return ScaledValue {
                    relative: signed.value() / a,
                    log_scale: a.ln(),
                };
            }
        }
        let logs: Vec<(i8, S)> = self.terms.iter().map(|t| t.log_value_at(k)).collect();
        let (_, relative) = log_domain_sum(&logs);
        let abs_logs: Vec<(i8, S)> = logs.iter().map(|&(_, l)| (1, l)).collect();
        let (scale, _) = log_domain_sum(&abs_logs);
        ScaledValue {
            relative,
            log_scale: scale.log_mag,
        }
    }

    /// Derivative of the given order: each coefficient is multiplied by
    /// `ln T_j` once per order, so `derivative(m)` followed by
    /// `derivative(n)` is bit-identical to `derivative(m + n)`.
    pub fn derivative(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .filter_map(|t| {
                let l = t.base.ln();
                let mut c = t.coefficient;
                for _ in 0..order {
                    c = c * l;
                }
                (c != S::zero()).then_some(ExpTerm {
                    coefficient: c,
                    base: t.base,
                })
            })
            .collect();
        // Distinct bases in descending order are preserved.
        Self { terms }
    }

    /// Divides every base by `t0 + delta` when the largest base `t0` is at
    /// least one, so all bases land strictly below one. Returns the divisor
    /// (one when no rescaling was needed) and the rescaled sum; the original
    /// equals `divisor^k * normalized(k)` pointwise.
    pub fn normalize_bases(&self, delta: S) -> Result<(S, Self), CoreError> {
        if !(delta.is_finite() && delta > S::zero()) {
            return Err(CoreError::InvalidDelta(delta.as_f64()));
        }
        let t0 = self.strongest().ok_or(CoreError::Empty)?.base;
        if t0 < S::one() {
            return Ok((S::one(), self.clone()));
        }
        let divisor = t0 + delta;
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm {
                coefficient: t.coefficient,
                base: t.base / divisor,
            })
            .collect::<Vec<_>>();
        // Division can collapse two adjacent bases into one value.
        Ok((divisor, merge_terms(&terms)))
    }

    /// [`normalize_bases`](Self::normalize_bases) with `delta = 0.01 * t0`.
    pub fn normalize_bases_default(&self) -> Result<(S, Self), CoreError> {
        let t0 = self.strongest().ok_or(CoreError::Empty)?.base;
        self.normalize_bases(S::lit(0.01) * t0)
    }

    /// Appends `-level` on base one, so roots are solutions of `S(k) = level`.
    pub fn minus_level(&self, level: S) -> Self {
        let mut terms = self.terms.clone();
        terms.push(ExpTerm {
            coefficient: -level,
            base: S::one(),
        });
        merge_terms(&terms)
    }

    pub fn scale(&self, factor: S) -> Self {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|t| ExpTerm {
                coefficient: t.coefficient * factor,
                base: t.base,
            })
            .collect();
        merge_terms(&terms)
    }
}

/// Canonical form of an arbitrary term list: equal bases merged (exact
/// comparison), zero coefficients dropped, bases strictly descending.
pub fn merge_terms<S: Scalar>(terms: &[ExpTerm<S>]) -> ExpSum<S> {
    let mut sorted = terms.to_vec();
    // Stable sort keeps merge order deterministic for equal bases.
    sorted.sort_by(|a, b| b.base.partial_cmp(&a.base).unwrap_or(Ordering::Equal));
    let mut out: Vec<ExpTerm<S>> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let base = sorted[i].base;
        let mut acc = CompensatedSum::new();
        while i < sorted.len() && sorted[i].base == base {
            acc.add(sorted[i].coefficient);
            i += 1;
        }
        let c = acc.value();
        if c != S::zero() {
            out.push(ExpTerm {
                coefficient: c,
                base,
            });
        }
    }
    ExpSum { terms: out }
}

/// Folds shifted terms `C t^(k - a)` into plain terms `(C t^(-a)) t^k`.
pub fn collapse_shifts<S: Scalar>(terms: &[ShiftedTerm<S>]) -> Result<ExpSum<S>, CoreError> {
    let plain = terms
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = ExpTerm::checked(i, s.coefficient, s.base)?;
            ExpTerm::checked(i, s.coefficient * s.base.powf(-s.shift), t.base)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_terms(&plain))
}

/// Coefficient `C0 = sum_j C_j / ln a_j` of the single natural logarithm
/// equal to `sum_j C_j log_{a_j}(x)`.
pub fn collapse_log_sum<S: Scalar>(coefficients: &[S], bases: &[S]) -> Result<S, CoreError> {
    if coefficients.len() != bases.len() {
        return Err(CoreError::LengthMismatch {
            coefficients: coefficients.len(),
            bases: bases.len(),
        });
    }
    let mut acc = CompensatedSum::new();
    for (index, (&c, &a)) in coefficients.iter().zip(bases).enumerate() {
        if !(a.is_finite() && a > S::zero()) || a == S::one() {
            return Err(CoreError::InvalidLogBase {
                index,
                value: a.as_f64(),
            });
        }
        acc.add(c / a.ln());
    }
    Ok(acc.value())
}

impl<S: Scalar> TryFrom<Vec<ExpTerm<S>>> for ExpSum<S> {
    type Error = CoreError;
    fn try_from(terms: Vec<ExpTerm<S>>) -> Result<Self, Self::Error> {
        Ok(merge_terms(&terms))
    }
}

impl<S: Scalar> From<ExpSum<S>> for Vec<ExpTerm<S>> {
    fn from(s: ExpSum<S>) -> Self {
        s.terms
    }
}

impl<S: Scalar> Neg for &ExpSum<S> {
    type Output = ExpSum<S>;
    fn neg(self) -> ExpSum<S> {
        ExpSum {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    coefficient: -t.coefficient,
                    base: t.base,
                })
                .collect(),
        }
    }
}

impl<S: Scalar> Add for &ExpSum<S> {
    type Output = ExpSum<S>;
    fn add(self, rhs: Self) -> ExpSum<S> {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&rhs.terms);
        merge_terms(&terms)
    }
}

impl<S: Scalar> Sub for &ExpSum<S> {
    type Output = ExpSum<S>;
    fn sub(self, rhs: Self) -> ExpSum<S> {
        self + &(-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    fn sum(pairs: &[(f64, f64)]) -> ExpSum<f64> {
        ExpSum::from_pairs(pairs).unwrap()
    }

    fn pairs(s: &ExpSum<f64>) -> Vec<(f64, f64)> {
        s.terms()
            .iter()
            .map(|t| (t.coefficient(), t.base()))
            .collect()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(sum(&[(1.0, 2.0)]).evaluate(3.0).unwrap(), 8.0);
        let s = sum(&[(8.0, 0.9), (-6.0, 0.8), (-4.0, 0.6), (-3.0, 0.5)]);
        assert_eq!(s.evaluate(0.0).unwrap(), -5.0);
        let cubic = sum(&[(1.0, E.powi(3)), (-6.0, E * E), (11.0, E), (-6.0, 1.0)]);
        assert!(cubic.evaluate(LN_2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(ExpSum::<f64>::empty().evaluate(12.5).unwrap(), 0.0);
        assert_eq!(ExpSum::<f64>::empty().evaluate_scaled(1.0).relative, 0.0);
    }

    #[test]
    fn overflow_reports_term_index() {
        let s = sum(&[(1.0, 0.5), (1.0, 1e-3)]);
        match s.evaluate(-200.0) {
            Err(CoreError::Range { term, .. }) => assert_eq!(term, 1),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn scaled_value_survives_overflow() {
        let s = sum(&[(1.0, 0.5), (-1.0, 1e-3)]);
        let v = s.evaluate_scaled(-200.0);
        assert!((v.relative + 1.0).abs() < 1e-12);
        assert!(v.log_scale > 1000.0);
    }

    #[test]
    fn derivative_examples() {
        let d = sum(&[(2.0, 0.5)]).derivative(1);
        assert_eq!(pairs(&d), vec![(2.0 * 0.5_f64.ln(), 0.5)]);
        assert!((d.terms()[0].coefficient() + 1.386294361).abs() < 1e-9);

        let s = sum(&[(1.0, E), (-1.0, E * E)]);
        assert_eq!(s.derivative(0), s);
        let d2 = s.derivative(2);
        let got = pairs(&d2);
        assert!((got[0].0 + 4.0).abs() < 1e-14 && got[0].1 == E * E);
        assert!((got[1].0 - 1.0).abs() < 1e-15 && got[1].1 == E);
    }

    #[test]
    fn derivative_drops_unit_base() {
        let s = sum(&[(3.0, 1.0), (2.0, 0.5)]);
        let d = s.derivative(1);
        assert_eq!(d.len(), 1);
        assert_eq!(d.terms()[0].base(), 0.5);
    }

    #[test]
    fn derivative_composes_exactly() {
        let s = sum(&[(1.7, 3.1), (-2.2, 0.4), (0.3, 0.05)]);
        for m in 0..4 {
            for n in 0..4 {
                assert_eq!(s.derivative(m).derivative(n), s.derivative(m + n));
            }
        }
    }

    #[test]
    fn normalize_examples() {
        let (div, n) = sum(&[(1.0, 2.0), (-1.0, 0.5)])
            .normalize_bases(0.5)
            .unwrap();
        assert_eq!(div, 2.5);
        assert_eq!(pairs(&n), vec![(1.0, 0.8), (-1.0, 0.2)]);

        let s = sum(&[(3.0, 0.9)]);
        let (div, n) = s.normalize_bases(0.1).unwrap();
        assert_eq!(div, 1.0);
        assert_eq!(n, s);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert_eq!(
            ExpSum::<f64>::empty().normalize_bases(0.1),
            Err(CoreError::Empty)
        );
        assert!(matches!(
            sum(&[(1.0, 2.0)]).normalize_bases(0.0),
            Err(CoreError::InvalidDelta(_))
        ));
    }

    #[test]
    fn default_delta_is_one_percent() {
        let (div, n) = sum(&[(1.0, 4.0), (1.0, 2.0)])
            .normalize_bases_default()
            .unwrap();
        assert!((div - 4.04).abs() < 1e-15);
        assert!(n.bases().all(|b| b < 1.0));
    }

    #[test]
    fn collapse_shift_examples() {
        let st = |c, t, a| ShiftedTerm {
            coefficient: c,
            base: t,
            shift: a,
        };
        assert_eq!(
            pairs(&collapse_shifts(&[st(2.0, 0.5, 1.0)]).unwrap()),
            vec![(4.0, 0.5)]
        );
        assert_eq!(
            pairs(&collapse_shifts(&[st(1.3, 0.7, 0.0)]).unwrap()),
            vec![(1.3, 0.7)]
        );
        assert_eq!(
            pairs(&collapse_shifts(&[st(1.0, 2.0, 1.0), st(1.0, 2.0, -1.0)]).unwrap()),
            vec![(2.5, 2.0)]
        );
    }

    #[test]
    fn collapse_log_sum_examples() {
        assert!((collapse_log_sum(&[1.0, 1.0], &[E, E * E]).unwrap() - 1.5).abs() < 1e-15);
        assert!((collapse_log_sum(&[5.0], &[E]).unwrap() - 5.0).abs() < 1e-15);
        assert!(
            collapse_log_sum(&[2.0, -3.0], &[E * E, E.powi(3)])
                .unwrap()
                .abs()
                < 1e-15
        );
        assert!(matches!(
            collapse_log_sum(&[1.0], &[1.0]),
            Err(CoreError::InvalidLogBase { index: 0, .. })
        ));
        assert!(matches!(
            collapse_log_sum(&[1.0, 2.0], &[E]),
            Err(CoreError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn merge_examples() {
        let t = |c, b| ExpTerm::new(c, b).unwrap();
        assert_eq!(
            pairs(&merge_terms(&[t(1.0, 0.5), t(2.0, 0.5)])),
            vec![(3.0, 0.5)]
        );
        assert!(merge_terms(&[t(1.0, 0.5), t(-1.0, 0.5)]).is_empty());
        assert_eq!(
            pairs(&merge_terms(&[t(1.0, 0.2), t(1.0, 0.9)])),
            vec![(1.0, 0.9), (1.0, 0.2)]
        );
    }

    #[test]
    fn construction_rejects_invalid_terms() {
        assert!(matches!(
            ExpSum::from_pairs(&[(1.0, 0.5), (1.0, -0.5)]),
            Err(CoreError::InvalidBase { index: 1, .. })
        ));
        assert!(matches!(
            ExpSum::from_pairs(&[(f64::NAN, 0.5)]),
            Err(CoreError::NonFiniteCoefficient { index: 0, .. })
        ));
    }

    #[test]
    fn arithmetic_merges() {
        let a = sum(&[(1.0, 0.9), (2.0, 0.5)]);
        let b = sum(&[(1.0, 0.9), (-1.0, 0.3)]);
        assert_eq!(pairs(&(&a - &b)), vec![(2.0, 0.5), (1.0, 0.3)]);
        assert!((&a - &a).is_empty());
    }

    #[test]
    fn serde_uses_c_t_schema() {
        let s = sum(&[(1.0, 0.5), (-2.0, 0.25)]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"[{"c":1.0,"t":0.5},{"c":-2.0,"t":0.25}]"#);
        let back: ExpSum<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<ExpSum<f64>>(r#"[{"c":1.0,"t":-1.0}]"#).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let s = ExpSum::<f32>::from_pairs(&[(1.0, 2.0), (-4.0, 1.0)]).unwrap();
        assert_eq!(s.evaluate(2.0).unwrap(), 0.0);
    }
}
