//! Synchronization of pair functions at a common characteristic point.
//!
//! Two engines live here:
//!
//! * [`sync_at_point`] rewrites each pair's coefficient in closed form so all
//!   pairs share a point, leaving signed residual terms that keep the total
//!   unchanged. [`pick_sync_point`] chooses the point so every residual has
//!   the requested sign.
//! * [`split_shared_mi`] and [`add_strong_terms`] distribute a single term
//!   across several pairs so they share a point with no residuals at all.
//!   The common point is the root of a one-dimensional share equation found
//!   by bracket expansion and bisection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expsum::{merge_terms, ExpSum, ExpTerm};
use crate::pairfn::{PairError, PairFunction, PairKind, MAX_DERIVATIVE_ORDER};
use crate::scalar::{log_domain_sum, LogMagnitude, Scalar};

/// Largest bracket half-width is `2^MAX_BRACKET_DOUBLINGS`.
pub const MAX_BRACKET_DOUBLINGS: i32 = 20;
/// Bisection stops once `|sum of shares - target| <= SHARE_TOLERANCE * |target|`.
pub const SHARE_TOLERANCE: f64 = 1e-12;
pub const MAX_BISECTION_STEPS: usize = 200;
/// Samples per geometric shell when scanning for share-equation brackets.
const SHELL_SAMPLES: usize = 64;
/// Alternative share-equation roots reported in diagnostics.
const MAX_ALTERNATIVES: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyncError {
    #[error("at least one pair or term is required")]
    Empty,
    #[error("pair {index} is {found:?} but pair 0 is {expected:?}; sets must be homogeneous")]
    MixedKinds {
        index: usize,
        expected: PairKind,
        found: PairKind,
    },
    #[error("pair {index}: adjusted coefficient {value} is not positive and finite")]
    Infeasible { index: usize, value: f64 },
    #[error("split offset d = {d} must satisfy 0 <= d < {limit}")]
    SplitOffset { d: f64, limit: f64 },
    #[error("coefficient {index} must be finite and > 0, got {value}")]
    NonPositiveCoefficient { index: usize, value: f64 },
    #[error("pi bases must be all above or all below the mi base {mi_base}; term {index} has base {base}")]
    MixedBaseOrdering {
        index: usize,
        base: f64,
        mi_base: f64,
    },
    #[error("no bracket for the share equation within half-width 2^{MAX_BRACKET_DOUBLINGS}")]
    NoSolution,
    #[error("strong term (c = {coefficient}, t = {base}): {reason}")]
    InfeasibleAddition {
        coefficient: f64,
        base: f64,
        reason: String,
    },
    #[error("split is synchronized at {split:?}, cannot extend it at {requested:?}")]
    KindMismatch {
        split: PointKind,
        requested: PointKind,
    },
    #[error("derivative order {0} exceeds the cap of {MAX_DERIVATIVE_ORDER}")]
    OrderTooLarge(u32),
    #[error(transparent)]
    Pair(#[from] PairError),
}

/// Which characteristic point pairs are synchronized at.
///
/// `DerivativeZero(0)`, `(1)` and `(2)` are the same points as `Zero`,
/// `Extremum` and `Inflection` and compare equal to them.
#[derive(Debug, Clone, Copy, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Zero,
    Extremum,
    Inflection,
    DerivativeZero(u32),
}

impl PointKind {
    pub fn order(self) -> u32 {
        match self {
            PointKind::Zero => 0,
            PointKind::Extremum => 1,
            PointKind::Inflection => 2,
            PointKind::DerivativeZero(j) => j,
        }
    }

    pub fn from_order(j: u32) -> Self {
        match j {
            0 => PointKind::Zero,
            1 => PointKind::Extremum,
            2 => PointKind::Inflection,
            j => PointKind::DerivativeZero(j),
        }
    }

    fn checked_order(self) -> Result<u32, SyncError> {
        let j = self.order();
        if j > MAX_DERIVATIVE_ORDER {
            Err(SyncError::OrderTooLarge(j))
        } else {
            Ok(j)
        }
    }
}

impl PartialEq for PointKind {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order()
    }
}

/// Which coefficient of each pair [`sync_at_point`] rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustSide {
    PiSide,
    MiSide,
}

/// Requested sign of the residual terms for [`pick_sync_point`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSide {
    PiResiduals,
    MiResiduals,
}

/// Pairs sharing `sync_point` plus the residual terms that restore the
/// original sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Scalar + Serialize",
    deserialize = "S: Scalar + Deserialize<'de>"
))]
pub struct SyncResult<S> {
    pub synchronized: Vec<PairFunction<S>>,
    /// One signed term per pair whose coefficient changed; positive terms
    /// are pi residuals, negative ones mi residuals.
    pub residuals: Vec<ExpTerm<S>>,
    pub sync_point: S,
    pub point_kind: PointKind,
}

impl<S: Scalar> SyncResult<S> {
    /// Residual terms merged by base.
    pub fn residual_sum(&self) -> ExpSum<S> {
        merge_terms(&self.residuals)
    }

    /// Synchronized pairs plus residuals, which equals the input sum.
    pub fn to_expsum(&self) -> ExpSum<S> {
        let mut terms: Vec<ExpTerm<S>> = self
            .synchronized
            .iter()
            .flat_map(|p| [p.pi_term(), p.mi_term()])
            .collect();
        terms.extend_from_slice(&self.residuals);
        merge_terms(&terms)
    }
}

/// One strong term distributed over the pairs of a [`SplitResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Scalar + Serialize",
    deserialize = "S: Scalar + Deserialize<'de>"
))]
pub struct StrongShare<S> {
    pub term: ExpTerm<S>,
    /// Signed share of `term` assigned to each pair, same sign as the term.
    pub shares: Vec<S>,
    /// Common point before this term was added.
    pub previous_point: S,
    /// Other roots of the share equation, farther from `previous_point`.
    pub alternative_points: Vec<S>,
}

/// Pairs sharing one mi term, synchronized at `common_point` without
/// residuals, optionally extended by strong terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Scalar + Serialize",
    deserialize = "S: Scalar + Deserialize<'de>"
))]
pub struct SplitResult<S> {
    pub pairs: Vec<PairFunction<S>>,
    /// Magnitude of the mi term that was distributed.
    pub mi_total: S,
    pub mi_base: S,
    pub orientation: PairKind,
    pub common_point: S,
    pub point_kind: PointKind,
    pub strong: Vec<StrongShare<S>>,
}

impl<S: Scalar> SplitResult<S> {
    /// Pair `i` plus its shares of every strong term.
    pub fn composite(&self, i: usize) -> ExpSum<S> {
        let p = &self.pairs[i];
        let mut terms = vec![p.pi_term(), p.mi_term()];
        for add in &self.strong {
            if let Ok(t) = ExpTerm::new(add.shares[i], add.term.base()) {
                terms.push(t);
            }
        }
        merge_terms(&terms)
    }

    pub fn composites(&self) -> Vec<ExpSum<S>> {
        (0..self.pairs.len()).map(|i| self.composite(i)).collect()
    }

    /// Sum of all composites; equals the input pi terms, mi term and
    /// strong terms.
    pub fn to_expsum(&self) -> ExpSum<S> {
        let terms: Vec<ExpTerm<S>> = self
            .composites()
            .iter()
            .flat_map(|c| c.terms().to_vec())
            .collect();
        merge_terms(&terms)
    }

    pub fn mi_shares(&self) -> Vec<S> {
        self.pairs.iter().map(|p| p.c_m()).collect()
    }
}

/// Splits one pi coefficient into per-mi shares proportional to the mi
/// coefficients: `(min(c_p, sum C_m) - d) * C_m_n / sum C_m`.
pub fn proportional_split<S: Scalar>(c_p: S, mi: &[S], d: S) -> Result<Vec<S>, SyncError> {
    if mi.is_empty() {
        return Err(SyncError::Empty);
    }
    if !(c_p.is_finite() && c_p > S::zero()) {
        return Err(SyncError::NonPositiveCoefficient {
            index: 0,
            value: c_p.as_f64(),
        });
    }
    for (index, &c) in mi.iter().enumerate() {
        if !(c.is_finite() && c > S::zero()) {
            return Err(SyncError::NonPositiveCoefficient {
                index: index + 1,
                value: c.as_f64(),
            });
        }
    }
    let total: S = crate::scalar::compensated_sum(mi.iter().copied());
    let limit = c_p.min(total);
    if !(d >= S::zero() && d < limit) {
        return Err(SyncError::SplitOffset {
            d: d.as_f64(),
            limit: limit.as_f64(),
        });
    }
    Ok(mi.iter().map(|&c| (limit - d) * c / total).collect())
}

/// Pairs one pi term with each of several mi terms after a
/// [`proportional_split`] of its coefficient.
pub fn pairs_from_split<S: Scalar>(
    pi: ExpTerm<S>,
    mi: &[ExpTerm<S>],
    d: S,
) -> Result<Vec<PairFunction<S>>, SyncError> {
    let mags: Vec<S> = mi.iter().map(|t| t.coefficient().abs()).collect();
    let shares = proportional_split(pi.coefficient(), &mags, d)?;
    shares
        .iter()
        .zip(mi)
        .map(|(&c, m)| {
            Ok(PairFunction::new(
                c,
                pi.base(),
                m.coefficient().abs(),
                m.base(),
            )?)
        })
        .collect()
}

fn check_homogeneous<S: Scalar>(pairs: &[PairFunction<S>]) -> Result<PairKind, SyncError> {
    let first = pairs.first().ok_or(SyncError::Empty)?.kind();
    for (index, p) in pairs.iter().enumerate() {
        if p.kind() != first {
            return Err(SyncError::MixedKinds {
                index,
                expected: first,
                found: p.kind(),
            });
        }
    }
    Ok(first)
}

/// `ln |ln t|^j`, the log of the weight the `j`-th derivative puts on base `t`.
#[inline]
fn log_weight<S: Scalar>(t: S, j: u32) -> S {
    if j == 0 {
        S::zero()
    } else {
        S::from_u32(j).expect("small integer") * t.ln().abs().ln()
    }
}

/// Rewrites one coefficient of every pair so all pairs share the
/// characteristic point of `kind` at `k0`; the differences become residuals.
pub fn sync_at_point<S: Scalar>(
    pairs: &[PairFunction<S>],
    kind: PointKind,
    k0: S,
    adjust: AdjustSide,
) -> Result<SyncResult<S>, SyncError> {
    check_homogeneous(pairs)?;
    let j = kind.checked_order()?;
    let mut synchronized = Vec::with_capacity(pairs.len());
    let mut residuals = Vec::new();
    for (index, p) in pairs.iter().enumerate() {
        let (lp, lm) = (p.t_p().ln(), p.t_m().ln());
        let (wp, wm) = (log_weight(p.t_p(), j), log_weight(p.t_m(), j));
        // c'_p w_p t_p^k0 = c_m w_m t_m^k0, solved for the adjusted side
        let (old, log_new, base) = match adjust {
            AdjustSide::PiSide => (p.c_p(), p.c_m().ln() + wm - wp + k0 * (lm - lp), p.t_p()),
            AdjustSide::MiSide => (p.c_m(), p.c_p().ln() + wp - wm + k0 * (lp - lm), p.t_m()),
        };
        let new = log_new.exp();
        // exp turns the absolute rounding of its argument into relative error
        let conditioning = S::one() + wp.abs() + wm.abs() + (k0 * (lm - lp)).abs() + old.ln().abs();
        let negligible = S::epsilon() * S::lit(4.0) * conditioning;
        if !(new.is_finite() && new > S::zero()) {
            return Err(SyncError::Infeasible {
                index,
                value: new.as_f64(),
            });
        }
        let diff = match adjust {
            AdjustSide::PiSide => old - new,
            AdjustSide::MiSide => new - old,
        };
        // A rounding-level difference means the pair already sits at k0.
        let new = if diff.abs() <= negligible * old.max(new) {
            old
        } else {
            residuals.push(ExpTerm::new(diff, base).map_err(|_| SyncError::Infeasible {
                index,
                value: diff.as_f64(),
            })?);
            new
        };
        let pair = match adjust {
            AdjustSide::PiSide => p.with_c_p(new),
            AdjustSide::MiSide => p.with_c_m(new),
        }
        .map_err(|_| SyncError::Infeasible {
            index,
            value: new.as_f64(),
        })?;
        synchronized.push(pair);
    }
    Ok(SyncResult {
        synchronized,
        residuals,
        sync_point: k0,
        point_kind: kind,
    })
}

/// Synchronization point that makes every residual of [`sync_at_point`]
/// carry the requested sign: the largest individual point for HPF with pi
/// residuals or LPF with mi residuals, the smallest otherwise.
pub fn pick_sync_point<S: Scalar>(
    pairs: &[PairFunction<S>],
    kind: PointKind,
    residual_side: ResidualSide,
) -> Result<S, SyncError> {
    let pair_kind = check_homogeneous(pairs)?;
    let j = kind.checked_order()?;
    let points = pairs.iter().map(|p| p.characteristic_point_unchecked(j));
    let take_max = matches!(
        (pair_kind, residual_side),
        (PairKind::Hpf, ResidualSide::PiResiduals) | (PairKind::Lpf, ResidualSide::MiResiduals)
    );
    Ok(if take_max {
        points.fold(S::neg_infinity(), S::max)
    } else {
        points.fold(S::infinity(), S::min)
    })
}

/// Share of the mi coefficient that puts the pair `(pi, mi_base)` at the
/// `kind` point `k`: `C_p (T_p / T_m)^k (ln T_p / ln T_m)^j`.
///
/// Increasing in `k` when `T_p > T_m`, decreasing otherwise.
pub fn mi_share<S: Scalar>(pi: &ExpTerm<S>, mi_base: S, kind: PointKind, k: S) -> S {
    let j = kind.order();
    (pi.coefficient().ln() + log_weight(pi.base(), j) - log_weight(mi_base, j)
        + k * (pi.base() / mi_base).ln())
    .exp()
}

/// Signed share of a strong term on `strong_base` that makes the `kind`-th
/// derivative of `composite + share * strong_base^k` vanish at `k`.
pub fn strong_share<S: Scalar>(composite: &ExpSum<S>, strong_base: S, kind: PointKind, k: S) -> S {
    let j = kind.order();
    let terms = strong_share_terms(composite, strong_base, j, k);
    let (sum, _) = log_domain_sum(&terms);
    sum.value()
}

/// Log-domain terms of the signed share, before summation.
fn strong_share_terms<S: Scalar>(
    composite: &ExpSum<S>,
    strong_base: S,
    j: u32,
    k: S,
) -> Vec<(i8, S)> {
    let lq = strong_base.ln();
    // sign of ln^j(T_q)
    let q_sign: i8 = if j % 2 == 1 && lq < S::zero() { -1 } else { 1 };
    let wq = log_weight(strong_base, j);
    composite
        .derivative(j)
        .terms()
        .iter()
        .map(|t| {
            let c = LogMagnitude::from_value(t.coefficient());
            (-c.sign * q_sign, c.log_mag - wq + k * (t.base().ln() - lq))
        })
        .collect()
}

fn share_tolerance<S: Scalar>() -> S {
    S::lit(SHARE_TOLERANCE).max(S::epsilon() * S::lit(16.0))
}

/// Distributes one mi term over several pi terms so the resulting pairs
/// share the `kind` point, with no residual terms.
///
/// Pi bases must all exceed the mi base (high pairs) or all lie below it
/// (low pairs); every base must lie in `(0, 1)`.
pub fn split_shared_mi<S: Scalar>(
    pi_terms: &[ExpTerm<S>],
    mi_term: ExpTerm<S>,
    kind: PointKind,
) -> Result<SplitResult<S>, SyncError> {
    let j = kind.checked_order()?;
    if pi_terms.is_empty() {
        return Err(SyncError::Empty);
    }
    let mi_total = mi_term.coefficient().abs();
    let mi_base = mi_term.base();
    if mi_total == S::zero() {
        return Err(SyncError::NonPositiveCoefficient {
            index: 0,
            value: 0.0,
        });
    }
    let mut orientation = None;
    for (index, t) in pi_terms.iter().enumerate() {
        if !(t.coefficient() > S::zero()) {
            return Err(SyncError::NonPositiveCoefficient {
                index,
                value: t.coefficient().as_f64(),
            });
        }
        let this = if t.base() > mi_base {
            PairKind::Hpf
        } else if t.base() < mi_base {
            PairKind::Lpf
        } else {
            return Err(SyncError::MixedBaseOrdering {
                index,
                base: t.base().as_f64(),
                mi_base: mi_base.as_f64(),
            });
        };
        if orientation.is_some_and(|o| o != this) {
            return Err(SyncError::MixedBaseOrdering {
                index,
                base: t.base().as_f64(),
                mi_base: mi_base.as_f64(),
            });
        }
        orientation = Some(this);
    }
    let orientation = orientation.expect("non-empty");

    if pi_terms.len() == 1 {
        let t = pi_terms[0];
        let pair = PairFunction::new(t.coefficient(), t.base(), mi_total, mi_base)?;
        return Ok(SplitResult {
            common_point: pair.characteristic_point_unchecked(j),
            pairs: vec![pair],
            mi_total,
            mi_base,
            orientation,
            point_kind: kind,
            strong: Vec::new(),
        });
    }

    // Each share is exp(offset_i + k * rate_i); all rates share one sign.
    let lm = mi_base.ln();
    let wm = log_weight(mi_base, j);
    let offsets: Vec<S> = pi_terms
        .iter()
        .map(|t| t.coefficient().ln() + log_weight(t.base(), j) - wm)
        .collect();
    let rates: Vec<S> = pi_terms.iter().map(|t| t.base().ln() - lm).collect();
    let log_target = mi_total.ln();
    // ln(sum of shares / target)
    let excess = |k: S| -> S {
        let terms: Vec<(i8, S)> = offsets
            .iter()
            .zip(&rates)
            .map(|(&o, &r)| (1, o + k * r))
            .collect();
        log_domain_sum(&terms).0.log_mag - log_target
    };
    // Centre: mean of the points each pi term would have with the whole mi term.
    let n = S::from_usize(offsets.len()).expect("small integer");
    let centre = offsets
        .iter()
        .zip(&rates)
        .map(|(&o, &r)| (log_target - o) / r)
        .fold(S::zero(), |a, b| a + b)
        / n;

    let (lo, hi) = expand_bracket(centre, &excess).ok_or(SyncError::NoSolution)?;
    let k0 = bisect_share_equation(lo, hi, &excess, |e| e.exp_m1().abs());

    // The share equation can be too steep in k for adjacent floats to hit the
    // total, so the shares are rescaled to conserve it exactly.
    let raw: Vec<S> = offsets
        .iter()
        .zip(&rates)
        .map(|(&o, &r)| (o + k0 * r).exp())
        .collect();
    let correction = mi_total / raw.iter().fold(S::zero(), |a, &b| a + b);
    let pairs = pi_terms
        .iter()
        .enumerate()
        .map(|(index, t)| {
            let share = raw[index] * correction;
            PairFunction::new(t.coefficient(), t.base(), share, mi_base).map_err(|_| {
                SyncError::Infeasible {
                    index,
                    value: share.as_f64(),
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SplitResult {
        pairs,
        mi_total,
        mi_base,
        orientation,
        common_point: k0,
        point_kind: kind,
        strong: Vec::new(),
    })
}

/// Widens `[centre - 2^w, centre + 2^w]` until `f` changes sign across it.
fn expand_bracket<S: Scalar>(centre: S, f: &impl Fn(S) -> S) -> Option<(S, S)> {
    let two = S::lit(2.0);
    for w in 0..=MAX_BRACKET_DOUBLINGS {
        let h = two.powi(w);
        let (lo, hi) = (centre - h, centre + h);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == S::zero() {
            return Some((lo, lo));
        }
        if fhi == S::zero() {
            return Some((hi, hi));
        }
        if (flo < S::zero()) != (fhi < S::zero()) {
            return Some((lo, hi));
        }
    }
    None
}

/// Bisection on a sign change of `f` in `[a, b]`, stopping when
/// `residual(f(mid)) <= SHARE_TOLERANCE` or after the step cap.
fn bisect_share_equation<S: Scalar>(
    mut a: S,
    mut b: S,
    f: &impl Fn(S) -> S,
    residual: impl Fn(S) -> S,
) -> S {
    if a == b {
        return a;
    }
    let tol = share_tolerance::<S>();
    let fa_negative = f(a) < S::zero();
    let half = S::lit(0.5);
    let mut mid = half * (a + b);
    for _ in 0..MAX_BISECTION_STEPS {
        mid = half * (a + b);
        let fm = f(mid);
        if residual(fm) <= tol || mid == a || mid == b {
            break;
        }
        if (fm < S::zero()) == fa_negative {
            a = mid;
        } else {
            b = mid;
        }
    }
    mid
}

/// Adds strong terms one at a time (ascending base) to a split, giving each
/// pair a share so the enlarged composites again share the `kind` point.
///
/// For high pairs the strong terms are positive with bases above the mi
/// base; for low pairs they are negative with bases above every pi base.
/// Each addition moves the common point to the left; the root nearest the
/// previous point is taken and any farther roots are kept as diagnostics.
pub fn add_strong_terms<S: Scalar>(
    split: &SplitResult<S>,
    strong_terms: &[ExpTerm<S>],
    kind: PointKind,
) -> Result<SplitResult<S>, SyncError> {
    let j = kind.checked_order()?;
    if kind != split.point_kind {
        return Err(SyncError::KindMismatch {
            split: split.point_kind,
            requested: kind,
        });
    }
    let mut ordered = strong_terms.to_vec();
    ordered.sort_by(|a, b| a.base().partial_cmp(&b.base()).expect("finite bases"));

    let mut out = split.clone();
    for term in ordered {
        let fail = |reason: &str| SyncError::InfeasibleAddition {
            coefficient: term.coefficient().as_f64(),
            base: term.base().as_f64(),
            reason: reason.to_string(),
        };
        match out.orientation {
            PairKind::Hpf => {
                if !(term.coefficient() > S::zero()) {
                    return Err(fail("strong terms added to high pairs must be positive"));
                }
                if !(term.base() > out.mi_base) {
                    return Err(fail("base must exceed the mi base"));
                }
            }
            PairKind::Lpf => {
                if !(term.coefficient() < S::zero()) {
                    return Err(fail("strong terms added to low pairs must be negative"));
                }
                if out.pairs.iter().any(|p| !(term.base() > p.t_p())) {
                    return Err(fail("base must exceed every pi base"));
                }
            }
        }
        if j > 0 && term.base() == S::one() {
            return Err(fail("a unit base has vanishing derivatives"));
        }

        let composites = out.composites();
        let target = term.coefficient();
        let log_target = target.abs().ln();
        let target_sign: i8 = if target > S::zero() { 1 } else { -1 };
        let base = term.base();
        // (sum of shares - target) as a log-magnitude, relative to |target|
        let residual_at = |k: S| -> LogMagnitude<S> {
            let mut terms: Vec<(i8, S)> = composites
                .iter()
                .flat_map(|c| strong_share_terms(c, base, j, k))
                .collect();
            terms.push((-target_sign, log_target));
            log_domain_sum(&terms).0
        };
        let signed = |k: S| -> S {
            let r = residual_at(k);
            S::from_i8(r.sign).expect("sign")
        };

        let previous = out.common_point;
        let brackets = scan_left(previous, &signed);
        let Some(&(lo, hi)) = brackets.first() else {
            return Err(fail("share equation has no root left of the common point"));
        };
        let relative = |k: S| -> S {
            let r = residual_at(k);
            if r.sign == 0 {
                S::zero()
            } else {
                S::from_i8(r.sign).expect("sign") * (r.log_mag - log_target).exp()
            }
        };
        let solve = |lo: S, hi: S| bisect_share_equation(lo, hi, &relative, |v| v.abs());
        let k_new = solve(lo, hi);
        let alternative_points = brackets
            .iter()
            .skip(1)
            .take(MAX_ALTERNATIVES)
            .map(|&(a, b)| solve(a, b))
            .collect();

        let mut shares: Vec<S> = composites
            .iter()
            .map(|c| strong_share(c, base, kind, k_new))
            .collect();
        let total = shares.iter().fold(S::zero(), |a, &b| a + b);
        if total.is_finite() && total != S::zero() {
            let correction = target / total;
            shares.iter_mut().for_each(|s| *s = *s * correction);
        }
        if shares
            .iter()
            .any(|&s| !(s.is_finite() && s != S::zero() && (s > S::zero()) == (target > S::zero())))
        {
            return Err(fail(
                "a share falls outside the region of shares with the term's sign",
            ));
        }
        out.strong.push(StrongShare {
            term,
            shares,
            previous_point: previous,
            alternative_points,
        });
        out.common_point = k_new;
    }
    Ok(out)
}

/// Scans geometric shells left of `origin` and returns every sign-change
/// bracket `(lo, hi)` of `sign_at`, nearest first.
fn scan_left<S: Scalar>(origin: S, sign_at: &impl Fn(S) -> S) -> Vec<(S, S)> {
    let mut brackets = Vec::new();
    let mut prev_k = origin;
    let mut prev_s = sign_at(origin);
    let samples = S::from_usize(SHELL_SAMPLES).expect("small integer");
    let two = S::lit(2.0);
    for w in 0..=MAX_BRACKET_DOUBLINGS {
        let (start, width) = if w == 0 {
            (S::zero(), S::one())
        } else {
            let h = two.powi(w - 1);
            (h, h)
        };
        for i in 1..=SHELL_SAMPLES {
            let k = origin - start - width * S::from_usize(i).expect("small integer") / samples;
            let s = sign_at(k);
            if s != S::zero() && prev_s != S::zero() && s != prev_s {
                brackets.push((k, prev_k));
            }
            if s != S::zero() {
                prev_s = s;
                prev_k = k;
            }
        }
    }
    brackets
}
