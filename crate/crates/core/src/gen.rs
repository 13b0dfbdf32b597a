//! Seeded random instances for property checks and the claim checker.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::expsum::{ExpSum, ExpTerm};
use crate::pairfn::{PairFunction, PairKind};
use crate::scalar::Scalar;

/// Sampling ranges for random sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Coefficient magnitudes are log-uniform over this range.
    pub coefficient_range: (f64, f64),
    /// Bases are uniform over this open range.
    pub base_range: (f64, f64),
    pub min_base_separation: f64,
    pub min_terms: usize,
    pub max_terms: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            coefficient_range: (1e-2, 1e2),
            base_range: (0.05, 0.95),
            min_base_separation: 1e-3,
            min_terms: 2,
            max_terms: 6,
        }
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// `count` bases drawn uniformly from `range`, pairwise at least `sep` apart.
pub fn random_bases<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    range: (f64, f64),
    sep: f64,
) -> Vec<f64> {
    let mut bases: Vec<f64> = Vec::with_capacity(count);
    while bases.len() < count {
        let t = rng.gen_range(range.0..range.1);
        if t > range.0 && bases.iter().all(|&b| (b - t).abs() >= sep) {
            bases.push(t);
        }
    }
    bases
}

/// Random sum with signed, log-uniform coefficients.
pub fn random_sum<S: Scalar, R: Rng + ?Sized>(rng: &mut R, config: &GeneratorConfig) -> ExpSum<S> {
    let n = rng.gen_range(config.min_terms.max(1)..=config.max_terms.max(config.min_terms.max(1)));
    let bases = random_bases(rng, n, config.base_range, config.min_base_separation);
    let terms = bases
        .into_iter()
        .map(|t| {
            let mag = log_uniform(rng, config.coefficient_range);
            let c = if rng.gen_bool(0.5) { mag } else { -mag };
            ExpTerm::new(S::lit(c), S::lit(t)).expect("sampled term is valid")
        })
        .collect();
    ExpSum::new(terms)
}

/// Random pair function of the given kind.
pub fn random_pair<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    kind: PairKind,
    config: &GeneratorConfig,
) -> PairFunction<S> {
    let bases = random_bases(rng, 2, config.base_range, config.min_base_separation);
    let (hi, lo) = (bases[0].max(bases[1]), bases[0].min(bases[1]));
    let (t_p, t_m) = match kind {
        PairKind::Hpf => (hi, lo),
        PairKind::Lpf => (lo, hi),
    };
    let c_p = log_uniform(rng, config.coefficient_range);
    let c_m = log_uniform(rng, config.coefficient_range);
    PairFunction::new(S::lit(c_p), S::lit(t_p), S::lit(c_m), S::lit(t_m))
        .expect("sampled pair is valid")
}
