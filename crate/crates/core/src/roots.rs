//! Root isolation for exponential sums.
//!
//! Write `S(k) = T0^k g(k)` with `T0` the strongest base. Then
//! `g'(k) = T0^-k D(k)` where `D(k) = sum_{j>=1} C_j ln(T_j / T0) T_j^k` has
//! one term fewer than `S`. Between consecutive roots of `D` the function `g`
//! is monotone, so `S` has at most one root there and that root is bracketed
//! by a sign change. Recursing on `D` down to a single term (no roots)
//! isolates every root; bisection runs on the scale-free relative value
//! `S / sum |C_j T_j^k|`, which never overflows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expsum::{CoreError, ExpSum, ExpTerm};
use crate::scalar::Scalar;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Uniform samples added as breakpoints at the top level of the recursion.
pub const GRID_SAMPLES: usize = 512;
pub const MAX_BISECTION_STEPS: usize = 200;
/// Padding added on both sides of the computed sign-activity interval.
pub const WINDOW_PADDING: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("the sum is identically zero; every abscissa is a root")]
    IdenticallyZero,
    #[error("window ({lo}, {hi}) must be finite with lo < hi")]
    DegenerateWindow { lo: f64, hi: f64 },
    #[error("tolerance {0} must be finite and positive")]
    InvalidTolerance(f64),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// How a function passes through one of its roots, read left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    Rising,
    Falling,
    /// Touches zero without changing sign (a tangential root).
    Touching,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root<S> {
    pub at: S,
    pub crossing: Crossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Asymptote {
    ToZeroAbove,
    ToZeroBelow,
    ToPlusInfinity,
    ToMinusInfinity,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Scalar + Serialize",
    deserialize = "S: Scalar + Deserialize<'de>"
))]
pub struct RootReport<S> {
    pub roots: Vec<S>,
    /// Roots at which the sum touches zero without changing sign.
    pub tangential_roots: Vec<S>,
    /// Sign changes of the first derivative.
    pub extrema: Vec<S>,
    pub extremum_kinds: Vec<ExtremumKind>,
    /// Sign changes of the second derivative.
    pub inflections: Vec<S>,
    pub sign_change_bound: usize,
    pub window: (S, S),
    pub tol: S,
    pub left_asymptote: Asymptote,
    pub right_asymptote: Asymptote,
}

fn check_window<S: Scalar>(window: (S, S)) -> Result<(), RootError> {
    let (lo, hi) = window;
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(RootError::DegenerateWindow {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        })
    }
}

/// Tolerance actually used: `tol`, but never below the rounding floor of `S`.
fn effective_tol<S: Scalar>(tol: S) -> Result<S, RootError> {
    if !(tol.is_finite() && tol > S::zero()) {
        return Err(RootError::InvalidTolerance(tol.as_f64()));
    }
    Ok(tol.max(S::epsilon() * S::lit(64.0)))
}

/// `sum_{j>=1} C_j ln(T_j / T0) T_j^k`, whose roots are the critical points
/// of `S(k) / T0^k`.
pub fn reduced_derivative<S: Scalar>(sum: &ExpSum<S>) -> ExpSum<S> {
    let Some(t0) = sum.strongest().map(|t| t.base()) else {
        return ExpSum::empty();
    };
    let terms: Vec<ExpTerm<S>> = sum.terms()[1..]
        .iter()
        .filter_map(|t| ExpTerm::new(t.coefficient() * (t.base() / t0).ln(), t.base()).ok())
        .collect();
    ExpSum::new(terms)
}

/// All roots of `sum` in the closed window, sorted, each tagged with how the
/// sum crosses zero there.
///
/// A critical point where `|S| <= tol * scale` but the sign does not change
/// is reported once as a [`Crossing::Touching`] root.
pub fn isolate_roots<S: Scalar>(
    sum: &ExpSum<S>,
    window: (S, S),
    tol: S,
) -> Result<Vec<Root<S>>, RootError> {
    check_window(window)?;
    let tol = effective_tol(tol)?;
    if sum.is_empty() {
        return Err(RootError::IdenticallyZero);
    }
    Ok(isolate(sum, window, tol, GRID_SAMPLES))
}

/// Sorted roots of `sum` in the closed window.
pub fn find_roots<S: Scalar>(sum: &ExpSum<S>, window: (S, S), tol: S) -> Result<Vec<S>, RootError> {
    Ok(isolate_roots(sum, window, tol)?
        .into_iter()
        .map(|r| r.at)
        .collect())
}

#[inline]
fn relative<S: Scalar>(sum: &ExpSum<S>, k: S) -> S {
    sum.evaluate_scaled(k).relative
}

#[inline]
fn sign_of<S: Scalar>(v: S) -> i8 {
    if v > S::zero() {
        1
    } else if v < S::zero() {
        -1
    } else {
        0
    }
}

fn isolate<S: Scalar>(sum: &ExpSum<S>, window: (S, S), tol: S, grid: usize) -> Vec<Root<S>> {
    if sum.len() <= 1 {
        return Vec::new();
    }
    let (lo, hi) = window;
    let critical: Vec<S> = isolate(&reduced_derivative(sum), window, tol, 0)
        .into_iter()
        .map(|r| r.at)
        .filter(|&c| c > lo && c < hi)
        .collect();

    let mut points = Vec::with_capacity(critical.len() + grid + 2);
    points.push(lo);
    points.extend_from_slice(&critical);
    if grid > 0 {
        let n = S::from_usize(grid).expect("small integer");
        points.extend(
            (1..grid).map(|i| lo + (hi - lo) * S::from_usize(i).expect("small integer") / n),
        );
    }
    points.push(hi);
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    points.dedup();
    let values: Vec<S> = points.iter().map(|&k| relative(sum, k)).collect();

    let mut roots = Vec::new();
    for i in 0..points.len() {
        let v = values[i];
        if v == S::zero() {
            let left = values[..i]
                .iter()
                .rev()
                .map(|&x| sign_of(x))
                .find(|&s| s != 0);
            let right = values[i + 1..]
                .iter()
                .map(|&x| sign_of(x))
                .find(|&s| s != 0);
            let crossing = match (left, right) {
                (Some(l), Some(r)) if l == r => Crossing::Touching,
                (Some(l), _) if l < 0 => Crossing::Rising,
                (Some(_), _) => Crossing::Falling,
                (None, Some(r)) if r > 0 => Crossing::Rising,
                (None, Some(_)) => Crossing::Falling,
                (None, None) => Crossing::Touching,
            };
            roots.push(Root {
                at: points[i],
                crossing,
            });
            continue;
        }
        if i + 1 < points.len() {
            let w = values[i + 1];
            if w != S::zero() && (v < S::zero()) != (w < S::zero()) {
                roots.push(Root {
                    at: bisect(sum, points[i], points[i + 1], v < S::zero()),
                    crossing: if v < S::zero() {
                        Crossing::Rising
                    } else {
                        Crossing::Falling
                    },
                });
            }
        }
    }

    // Near-zero critical points flanked by same-signed critical levels.
    let mut level_points = Vec::with_capacity(critical.len() + 2);
    level_points.push(lo);
    level_points.extend_from_slice(&critical);
    level_points.push(hi);
    let level_values: Vec<S> = level_points.iter().map(|&k| relative(sum, k)).collect();
    for i in 1..level_points.len().saturating_sub(1) {
        let v = level_values[i];
        if v == S::zero() || v.abs() > tol {
            continue;
        }
        let s = sign_of(v);
        if sign_of(level_values[i - 1]) == s && sign_of(level_values[i + 1]) == s {
            roots.push(Root {
                at: level_points[i],
                crossing: Crossing::Touching,
            });
        }
    }
    roots.sort_by(|a, b| a.at.partial_cmp(&b.at).expect("finite roots"));
    roots.dedup_by(|a, b| a.at == b.at);
    roots
}

/// Bisects a strict sign change of the relative value down to adjacent
/// floats and returns the endpoint with the smaller residual.
fn bisect<S: Scalar>(sum: &ExpSum<S>, mut a: S, mut b: S, a_negative: bool) -> S {
    let half = S::lit(0.5);
    let (mut ra, mut rb) = (relative(sum, a), relative(sum, b));
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = a + half * (b - a);
        if mid <= a || mid >= b {
            break;
        }
        let r = relative(sum, mid);
        if r == S::zero() {
            return mid;
        }
        if (r < S::zero()) == a_negative {
            a = mid;
            ra = r;
        } else {
            b = mid;
            rb = r;
        }
    }
    if ra.abs() <= rb.abs() {
        a
    } else {
        b
    }
}

/// Number of sign alternations of the coefficients read in base order;
/// an upper bound on the number of real roots.
pub fn sign_change_bound<S: Scalar>(sum: &ExpSum<S>) -> usize {
    sum.coefficients()
        .map(|c| c > S::zero())
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[0] != w[1])
        .count()
}

/// Interval outside which no root of `sum` can lie, padded by
/// [`WINDOW_PADDING`] on each side.
///
/// Beyond the returned core interval one end term outweighs all others
/// combined, so the sign is fixed. Pairwise crossovers
/// `ln|C_i / C_j| / ln(T_j / T_i)` are included as well.
pub fn default_window<S: Scalar>(sum: &ExpSum<S>) -> (S, S) {
    let pad = S::lit(WINDOW_PADDING);
    let terms = sum.terms();
    let n = terms.len();
    if n <= 1 {
        return (-pad, pad);
    }
    let mut lo = S::infinity();
    let mut hi = S::neg_infinity();
    let log_mag = |t: &ExpTerm<S>| t.coefficient().abs().ln();
    for i in 0..n {
        for j in i + 1..n {
            let x = (log_mag(&terms[i]) - log_mag(&terms[j]))
                / (terms[j].base() / terms[i].base()).ln();
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let others = S::from_usize(n - 1).expect("small integer").ln();
    let (first, last) = (&terms[0], &terms[n - 1]);
    for t in &terms[1..] {
        // |C_0| T_0^k > (n - 1) |C_j| T_j^k for every k above this point
        hi = hi.max((others + log_mag(t) - log_mag(first)) / (first.base() / t.base()).ln());
    }
    for t in &terms[..n - 1] {
        lo = lo.min((others + log_mag(t) - log_mag(last)) / (last.base() / t.base()).ln());
    }
    (lo - pad, hi + pad)
}

/// Window covering the sign activity of a sum and its first two derivatives.
pub fn analysis_window<S: Scalar>(sum: &ExpSum<S>) -> (S, S) {
    (0..=2).fold((S::infinity(), S::neg_infinity()), |(lo, hi), order| {
        let d = sum.derivative(order);
        if d.len() <= 1 && order > 0 {
            return (lo, hi);
        }
        let (a, b) = default_window(&d);
        (lo.min(a), hi.max(b))
    })
}

fn asymptote<S: Scalar>(term: &ExpTerm<S>, toward_plus: bool) -> Asymptote {
    let positive = term.coefficient() > S::zero();
    let grows = if toward_plus {
        term.base() > S::one()
    } else {
        term.base() < S::one()
    };
    if term.base() == S::one() {
        Asymptote::Constant
    } else if grows {
        if positive {
            Asymptote::ToPlusInfinity
        } else {
            Asymptote::ToMinusInfinity
        }
    } else if positive {
        Asymptote::ToZeroAbove
    } else {
        Asymptote::ToZeroBelow
    }
}

/// Roots, extrema, inflections, the sign-change bound and the asymptotic
/// behaviour of a sum. Without a window, one wide enough to hold every root
/// of the sum and its first two derivatives is used.
pub fn analyze<S: Scalar>(
    sum: &ExpSum<S>,
    window: Option<(S, S)>,
    tol: S,
) -> Result<RootReport<S>, RootError> {
    let window = window.unwrap_or_else(|| analysis_window(sum));
    let roots = isolate_roots(sum, window, tol)?;
    let crossings = |order: u32| -> Result<Vec<Root<S>>, RootError> {
        let d = sum.derivative(order);
        if d.is_empty() {
            return Ok(Vec::new());
        }
        Ok(isolate_roots(&d, window, tol)?
            .into_iter()
            .filter(|r| r.crossing != Crossing::Touching)
            .collect())
    };
    let extrema = crossings(1)?;
    let inflections = crossings(2)?;
    Ok(RootReport {
        roots: roots.iter().map(|r| r.at).collect(),
        tangential_roots: roots
            .iter()
            .filter(|r| r.crossing == Crossing::Touching)
            .map(|r| r.at)
            .collect(),
        extremum_kinds: extrema
            .iter()
            .map(|r| match r.crossing {
                Crossing::Rising => ExtremumKind::Minimum,
                _ => ExtremumKind::Maximum,
            })
            .collect(),
        extrema: extrema.iter().map(|r| r.at).collect(),
        inflections: inflections.iter().map(|r| r.at).collect(),
        sign_change_bound: sign_change_bound(sum),
        window,
        tol: effective_tol(tol)?,
        left_asymptote: asymptote(sum.weakest().expect("non-empty"), false),
        right_asymptote: asymptote(sum.strongest().expect("non-empty"), true),
    })
}

/// Outcome of intersecting two sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    rename_all = "snake_case",
    bound(
        serialize = "S: Scalar + Serialize",
        deserialize = "S: Scalar + Deserialize<'de>"
    )
)]
pub enum Intersections<S> {
    /// The sums are the same function.
    Identical,
    Points(Vec<S>),
}

impl<S: Scalar> Intersections<S> {
    pub fn count(&self) -> Option<usize> {
        match self {
            Intersections::Identical => None,
            Intersections::Points(p) => Some(p.len()),
        }
    }
}

pub fn intersections<S: Scalar>(
    s1: &ExpSum<S>,
    s2: &ExpSum<S>,
    window: Option<(S, S)>,
    tol: S,
) -> Result<Intersections<S>, RootError> {
    let diff = s1 - s2;
    if diff.is_empty() {
        return Ok(Intersections::Identical);
    }
    let window = window.unwrap_or_else(|| default_window(&diff));
    Ok(Intersections::Points(find_roots(&diff, window, tol)?))
}

/// Abscissae where `sum(k) = level`.
pub fn solve_level<S: Scalar>(
    sum: &ExpSum<S>,
    level: S,
    window: Option<(S, S)>,
    tol: S,
) -> Result<Vec<S>, RootError> {
    let shifted = sum.minus_level(level);
    let window = window.unwrap_or_else(|| default_window(&shifted));
    find_roots(&shifted, window, tol)
}

/// Discrete behaviour of `S_k` over consecutive integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesScan {
    pub start: u32,
    pub k_max: u32,
    pub sign_changes: usize,
    pub minus_to_plus: usize,
    pub maxima: usize,
    pub minima: usize,
    /// `|S_k|` is non-increasing over the final quarter of the range.
    pub converging: bool,
}

impl SeriesScan {
    pub fn extrema(&self) -> usize {
        self.maxima + self.minima
    }
}

/// Scans `S_k` for `k = 0..=k_max`.
///
/// Requires every base in `(0, 1)` and a positive coefficient on the
/// strongest term.
pub fn series_scan<S: Scalar>(sum: &ExpSum<S>, k_max: u32) -> Result<SeriesScan, RootError> {
    series_scan_from(sum, 0, k_max)
}

/// [`series_scan`] over `k = start..=k_max`.
pub fn series_scan_from<S: Scalar>(
    sum: &ExpSum<S>,
    start: u32,
    k_max: u32,
) -> Result<SeriesScan, RootError> {
    let lead = sum.strongest().ok_or(RootError::IdenticallyZero)?;
    if !(lead.coefficient() > S::zero()) {
        return Err(RootError::Domain(
            "series scan needs a positive coefficient on the strongest term".into(),
        ));
    }
    if sum.bases().any(|t| !(t > S::zero() && t < S::one())) {
        return Err(RootError::Domain(
            "series scan needs every base in (0, 1)".into(),
        ));
    }
    if k_max <= start {
        return Err(RootError::Domain(format!(
            "series scan needs k_max > start, got {start}..={k_max}"
        )));
    }
    let values = (start..=k_max)
        .map(|k| sum.evaluate(S::from_u32(k).expect("integer abscissa")))
        .collect::<Result<Vec<S>, _>>()?;

    let signs: Vec<i8> = values
        .iter()
        .map(|&v| sign_of(v))
        .filter(|&s| s != 0)
        .collect();
    let sign_changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let minus_to_plus = signs.windows(2).filter(|w| w[0] < 0 && w[1] > 0).count();

    let slopes: Vec<i8> = values
        .windows(2)
        .map(|w| sign_of(w[1] - w[0]))
        .filter(|&s| s != 0)
        .collect();
    let maxima = slopes.windows(2).filter(|w| w[0] > 0 && w[1] < 0).count();
    let minima = slopes.windows(2).filter(|w| w[0] < 0 && w[1] > 0).count();

    let tail = &values[values.len() - values.len().div_ceil(4)..];
    let converging = tail.windows(2).all(|w| w[1].abs() <= w[0].abs());
    Ok(SeriesScan {
        start,
        k_max,
        sign_changes,
        minus_to_plus,
        maxima,
        minima,
        converging,
    })
}

/// `scale * prod (t - r_i)` rewritten in `x = ln t`: the term for `t^n`
/// has base `e^n`, so the real roots of the result are exactly `ln r_i`.
pub fn polynomial_lift<S: Scalar>(positive_roots: &[S], scale: S) -> Result<ExpSum<S>, RootError> {
    if !(scale.is_finite() && scale != S::zero()) {
        return Err(RootError::Domain(format!(
            "lift scale must be finite and nonzero, got {scale}"
        )));
    }
    let mut sorted = positive_roots.to_vec();
    for &r in &sorted {
        if !(r.is_finite() && r > S::zero()) {
            return Err(RootError::Domain(format!(
                "lift roots must be positive, got {r}"
            )));
        }
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(RootError::Domain("lift roots must be distinct".into()));
    }
    // coefficients[n] multiplies t^n
    let mut coefficients = vec![scale];
    for &r in &sorted {
        let mut next = vec![S::zero(); coefficients.len() + 1];
        for (n, &c) in coefficients.iter().enumerate() {
            next[n + 1] = next[n + 1] + c;
            next[n] = next[n] - r * c;
        }
        coefficients = next;
    }
    let terms = coefficients
        .iter()
        .enumerate()
        .map(|(n, &c)| ExpTerm::new(c, S::from_usize(n).expect("small integer").exp()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExpSum::new(terms))
}
