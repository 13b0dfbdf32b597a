//! Empirical checker for the published root, extremum and series bounds.
//!
//! Nothing here asserts a bound. Each instance yields one report per
//! applicable claim with the measured counts next to the claimed bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expsum::{ExpSum, ExpTerm};
use crate::gen::{random_sum, GeneratorConfig};
use crate::roots::{analyze, intersections, series_scan_from, solve_level, RootError};
use crate::scalar::Scalar;

/// Last index of the integer range scanned for the series claims.
pub const SERIES_K_MAX: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Claim {
    /// At most two roots, two extrema and two inflections.
    Theorem,
    /// `S(k) = level` has at most three solutions.
    Corollary3,
    /// At most two roots.
    Corollary5,
    /// Two sums intersect at most twice.
    Corollary6,
    /// `S_k` over `k = 0, 1, ...` changes sign at most twice and has at most
    /// two extrema.
    Corollary7,
    /// `S_k` over `k = 1, 2, ...` changes sign from minus to plus at most
    /// once and has at most one maximum.
    SeriesConjecture,
}

impl Claim {
    pub fn bound(self) -> usize {
        match self {
            Claim::Theorem | Claim::Corollary5 | Claim::Corollary6 | Claim::Corollary7 => 2,
            Claim::Corollary3 => 3,
            Claim::SeriesConjecture => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Scalar + Serialize",
    deserialize = "S: Scalar + Deserialize<'de>"
))]
pub struct ClaimReport<S> {
    /// Position of the instance in generation (or input) order.
    pub trial: usize,
    pub instance: ExpSum<S>,
    pub claim: Claim,
    /// Counts compared against `bound`; their meaning depends on `claim`.
    pub measured: Vec<usize>,
    pub bound: usize,
    pub violated: bool,
    /// Set when the measurement itself failed; `measured` is then empty.
    pub note: Option<String>,
}

impl<S: Scalar> ClaimReport<S> {
    fn measured(trial: usize, instance: &ExpSum<S>, claim: Claim, measured: Vec<usize>) -> Self {
        let bound = claim.bound();
        Self {
            trial,
            instance: instance.clone(),
            claim,
            violated: measured.iter().any(|&m| m > bound),
            measured,
            bound,
            note: None,
        }
    }

    fn failed(trial: usize, instance: &ExpSum<S>, claim: Claim, err: RootError) -> Self {
        Self {
            trial,
            instance: instance.clone(),
            claim,
            measured: Vec::new(),
            bound: claim.bound(),
            violated: false,
            note: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Scalar + Serialize",
    deserialize = "S: Scalar + Deserialize<'de>"
))]
pub struct ClaimConfig<S> {
    pub trials: usize,
    pub seed: u64,
    pub generator: GeneratorConfig,
    /// Analysis window; each analysis picks its own when absent.
    pub window: Option<(S, S)>,
    pub tol: S,
    pub series_k_max: u32,
    /// Checked instead of generated sums when non-empty.
    pub instances: Vec<ExpSum<S>>,
}

impl<S: Scalar> Default for ClaimConfig<S> {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            generator: GeneratorConfig::default(),
            window: None,
            tol: S::lit(crate::roots::DEFAULT_TOLERANCE),
            series_k_max: SERIES_K_MAX,
            instances: Vec::new(),
        }
    }
}

/// Runs every applicable claim on each instance. Instances are analyzed in
/// parallel; reports come back in instance order.
pub fn claim_check<S: Scalar>(config: &ClaimConfig<S>) -> Vec<ClaimReport<S>> {
    let jobs: Vec<(ExpSum<S>, ExpSum<S>, ExpSum<S>)> = if config.instances.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        (0..config.trials)
            .map(|_| {
                let s = random_sum(&mut rng, &config.generator);
                let companion = random_sum(&mut rng, &config.generator);
                (s.clone(), s, companion)
            })
            .collect()
    } else {
        // A user instance is intersected as its positive part against its
        // negated negative part; the crossings are its own roots.
        config
            .instances
            .iter()
            .map(|s| {
                let (pos, neg): (Vec<ExpTerm<S>>, Vec<ExpTerm<S>>) =
                    s.terms().iter().partition(|t| t.coefficient() > S::zero());
                (s.clone(), ExpSum::new(pos), -&ExpSum::new(neg))
            })
            .collect()
    };
    jobs.par_iter()
        .enumerate()
        .map(|(trial, (s, a, b))| check_instance(trial, s, (a, b), config))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Reports for one instance; `curves` is the pair checked for the
/// intersection claim.
pub fn check_instance<S: Scalar>(
    trial: usize,
    s: &ExpSum<S>,
    curves: (&ExpSum<S>, &ExpSum<S>),
    config: &ClaimConfig<S>,
) -> Vec<ClaimReport<S>> {
    let mut out = Vec::with_capacity(6);
    let tol = config.tol;

    match analyze(s, config.window, tol) {
        Ok(report) => {
            out.push(ClaimReport::measured(
                trial,
                s,
                Claim::Theorem,
                vec![
                    report.roots.len(),
                    report.extrema.len(),
                    report.inflections.len(),
                ],
            ));
            out.push(
                match max_level_solutions(s, &report.extrema, report.window, config) {
                    Ok(n) => ClaimReport::measured(trial, s, Claim::Corollary3, vec![n]),
                    Err(e) => ClaimReport::failed(trial, s, Claim::Corollary3, e),
                },
            );
            out.push(ClaimReport::measured(
                trial,
                s,
                Claim::Corollary5,
                vec![report.roots.len()],
            ));
        }
        Err(e) => {
            for claim in [Claim::Theorem, Claim::Corollary3, Claim::Corollary5] {
                out.push(ClaimReport::failed(trial, s, claim, e.clone()));
            }
        }
    }

    out.push(
        match intersections(curves.0, curves.1, config.window, tol) {
            Ok(x) => {
                ClaimReport::measured(trial, s, Claim::Corollary6, vec![x.count().unwrap_or(0)])
            }
            Err(e) => ClaimReport::failed(trial, s, Claim::Corollary6, e),
        },
    );

    if s.bases().all(|t| t > S::zero() && t < S::one()) {
        // The series claims assume a positive strongest coefficient;
        // negating the instance does not change any count.
        let oriented = match s.strongest() {
            Some(t) if t.coefficient() < S::zero() => -s,
            _ => s.clone(),
        };
        out.push(match series_scan_from(&oriented, 0, config.series_k_max) {
            Ok(scan) => ClaimReport::measured(
                trial,
                s,
                Claim::Corollary7,
                vec![scan.sign_changes, scan.extrema()],
            ),
            Err(e) => ClaimReport::failed(trial, s, Claim::Corollary7, e),
        });
        out.push(match series_scan_from(&oriented, 1, config.series_k_max) {
            Ok(scan) => ClaimReport::measured(
                trial,
                s,
                Claim::SeriesConjecture,
                vec![scan.minus_to_plus, scan.maxima],
            ),
            Err(e) => ClaimReport::failed(trial, s, Claim::SeriesConjecture, e),
        });
    }
    out
}

/// Largest number of solutions of `S(k) = level`. The count only changes
/// at critical values and finite limits at either end, so one level between
/// and beyond each of those suffices.
fn max_level_solutions<S: Scalar>(
    s: &ExpSum<S>,
    extrema: &[S],
    window: (S, S),
    config: &ClaimConfig<S>,
) -> Result<usize, RootError> {
    let mut values = extrema
        .iter()
        .map(|&k| s.evaluate(k))
        .collect::<Result<Vec<S>, _>>()?;
    // The weakest term governs k -> -inf, the strongest k -> +inf.
    let limits = [
        s.weakest().map(|t| (t, t.base() > S::one())),
        s.strongest().map(|t| (t, t.base() < S::one())),
    ];
    for (end, decays) in limits.into_iter().flatten() {
        if end.base() == S::one() {
            values.push(end.coefficient());
        } else if decays {
            values.push(S::zero());
        }
    }
    if values.is_empty() {
        let mid = S::lit(0.5) * (window.0 + window.1);
        values.push(s.evaluate(mid)?);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite critical values"));
    values.dedup();
    let lowest = values[0];
    let highest = values[values.len() - 1];
    let spread = (highest - lowest)
        .max(lowest.abs())
        .max(highest.abs())
        .max(S::min_positive_value());
    let mut levels = vec![lowest - spread * S::lit(0.5)];
    levels.extend(values.windows(2).map(|w| S::lit(0.5) * (w[0] + w[1])));
    levels.push(highest + spread * S::lit(0.5));
    if values.len() == 1 {
        levels.push(values[0]);
    }
    let mut best = 0;
    for level in levels {
        match solve_level(s, level, config.window, config.tol) {
            Ok(r) => best = best.max(r.len()),
            Err(RootError::IdenticallyZero) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairfn::PairFunction;
    use crate::roots::polynomial_lift;

    fn reports_for(s: ExpSum<f64>) -> Vec<ClaimReport<f64>> {
        claim_check(&ClaimConfig {
            instances: vec![s],
            ..ClaimConfig::default()
        })
    }

    #[test]
    fn lift_counterexample_violates_root_claim() {
        let s = polynomial_lift(&[1.0, 2.0, 3.0], 1.0).unwrap();
        let reports = reports_for(s);
        let c5 = reports
            .iter()
            .find(|r| r.claim == Claim::Corollary5)
            .unwrap();
        assert_eq!(c5.measured, vec![3]);
        assert!(c5.violated);
        // bases above one: the series claims do not apply
        assert!(reports.iter().all(|r| r.claim != Claim::Corollary7));
    }

    #[test]
    fn single_pair_satisfies_everything() {
        let p = PairFunction::new(2.0, 0.8, 1.0, 0.3).unwrap();
        let reports = reports_for(p.as_expsum());
        assert_eq!(reports.len(), 6);
        for r in &reports {
            assert!(!r.violated, "{r:?}");
            assert!(r.note.is_none());
        }
        let theorem = &reports[0];
        assert_eq!(theorem.measured, vec![1, 1, 1]);
    }

    #[test]
    fn two_extremum_instance() {
        let s = ExpSum::from_pairs(&[
            (1.0, 0.9),
            (-3.0, 0.8),
            (-4.0, 0.6),
            (-3.0, 0.5),
            (11.0, 0.01),
        ])
        .unwrap();
        let reports = reports_for(s);
        let theorem = reports.iter().find(|r| r.claim == Claim::Theorem).unwrap();
        assert_eq!(theorem.measured, vec![2, 2, 2]);
        assert!(!theorem.violated);
        let c3 = reports
            .iter()
            .find(|r| r.claim == Claim::Corollary3)
            .unwrap();
        assert_eq!(c3.measured, vec![3]);
    }

    #[test]
    fn violated_iff_measured_exceeds_bound() {
        let cfg = ClaimConfig::<f64> {
            trials: 30,
            seed: 5,
            ..ClaimConfig::default()
        };
        for r in claim_check(&cfg) {
            assert_eq!(r.violated, r.measured.iter().any(|&m| m > r.bound));
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let cfg = ClaimConfig::<f64> {
            trials: 20,
            seed: 42,
            ..ClaimConfig::default()
        };
        assert_eq!(claim_check(&cfg), claim_check(&cfg));
    }
}
