//! Scalar abstraction and the summation kernels shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point type the crate is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every literal used by the crate is
    /// representable in both supported widths, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier's improvement of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<S> {
    sum: S,
    carry: S,
}

impl<S: Scalar> CompensatedSum<S> {
    pub fn new() -> Self {
        Self {
            sum: S::zero(),
            carry: S::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: S) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> S {
        self.sum + self.carry
    }
}

impl<S: Scalar> FromIterator<S> for CompensatedSum<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<S: Scalar, I: IntoIterator<Item = S>>(iter: I) -> S {
    iter.into_iter().collect::<CompensatedSum<S>>().value()
}

/// A real number stored as `sign * exp(log_mag)`; `sign` is -1, 0 or 1.
///
/// Used wherever exponential terms are evaluated far from the origin and the
/// plain representation would overflow or underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMagnitude<S> {
    pub sign: i8,
    pub log_mag: S,
}

impl<S: Scalar> LogMagnitude<S> {
    pub fn zero() -> Self {
        Self {
            sign: 0,
            log_mag: S::neg_infinity(),
        }
    }

    pub fn from_value(x: S) -> Self {
        if x == S::zero() {
            Self::zero()
        } else {
            Self {
                sign: if x > S::zero() { 1 } else { -1 },
                log_mag: x.abs().ln(),
            }
        }
    }

    /// Plain value; may overflow to infinity or underflow to zero.
    pub fn value(&self) -> S {
        match self.sign {
            0 => S::zero(),
            1 => self.log_mag.exp(),
            _ => -self.log_mag.exp(),
        }
    }
}

/// Sums signed terms given as `(sign, ln|term|)`.
///
/// Returns the sum as a [`LogMagnitude`] together with the ratio
/// `sum / sum(|term|)`, which lies in `[-1, 1]` and is the scale-free
/// quantity the root finder works with.
pub fn log_domain_sum<S: Scalar>(terms: &[(i8, S)]) -> (LogMagnitude<S>, S) {
    let peak = terms
        .iter()
        .filter(|(s, _)| *s != 0)
        .map(|&(_, l)| l)
        .fold(S::neg_infinity(), S::max);
    if peak == S::neg_infinity() {
        return (LogMagnitude::zero(), S::zero());
    }
    let mut signed = CompensatedSum::new();
    let mut absolute = CompensatedSum::new();
    for &(s, l) in terms {
        if s == 0 {
            continue;
        }
        let m = (l - peak).exp();
        absolute.add(m);
        signed.add(if s > 0 { m } else { -m });
    }
    let s = signed.value();
    let a = absolute.value();
    let sum = if s == S::zero() {
        LogMagnitude::zero()
    } else {
        LogMagnitude {
            sign: if s > S::zero() { 1 } else { -1 },
            log_mag: peak + s.abs().ln(),
        }
    };
    (sum, s / a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_unit() {
        let xs = [1e16, 1.0, -1e16];
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated_sum(xs), 1.0);
    }

    #[test]
    fn log_domain_sum_matches_plain_sum() {
        let vals = [3.0_f64, -2.5, 0.25];
        let terms: Vec<_> = vals
            .iter()
            .map(|&v| {
                let lm = LogMagnitude::from_value(v);
                (lm.sign, lm.log_mag)
            })
            .collect();
        let (sum, rel) = log_domain_sum(&terms);
        assert!((sum.value() - 0.75).abs() < 1e-15);
        assert!((rel - 0.75 / 5.75).abs() < 1e-15);
    }

    #[test]
    fn log_domain_sum_survives_overflowing_terms() {
        let terms = [(1_i8, 1000.0_f64), (-1, 999.0)];
        let (sum, rel) = log_domain_sum(&terms);
        assert_eq!(sum.sign, 1);
        let expected = 1000.0 + (1.0 - (-1.0_f64).exp()).ln();
        assert!((sum.log_mag - expected).abs() < 1e-12);
        assert!(rel > 0.0 && rel < 1.0);
    }

    #[test]
    fn empty_log_domain_sum_is_zero() {
        let (sum, rel) = log_domain_sum::<f64>(&[]);
        assert_eq!(sum.sign, 0);
        assert_eq!(rel, 0.0);
    }
}
