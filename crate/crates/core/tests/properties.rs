use expsum::roots::default_window;
use expsum::sync::mi_share;
use expsum::{
    add_strong_terms, collapse_shifts, find_roots, irr_evaluate, irr_solve, pick_sync_point,
    polynomial_lift, schedule_to_expsum, sign_change_bound, sign_sequence, split_shared_mi,
    sync_at_point, taylor_coefficients, AdjustSide, CashFlow, CashFlowSchedule, ExpSum, ExpTerm,
    PairFunction, PairKind, PointKind, ResidualSide, ShiftedTerm,
};
use proptest::prelude::*;

fn coefficient() -> impl Strategy<Value = f64> {
    (-2.0f64..2.0, any::<bool>()).prop_map(|(e, neg)| {
        let m = 10f64.powf(e);
        if neg {
            -m
        } else {
            m
        }
    })
}

fn base() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

/// Bases at least `1e-3` apart, as the generator guarantees.
fn separated(mut bases: Vec<f64>) -> Vec<f64> {
    bases.sort_by(|a, b| b.partial_cmp(a).unwrap());
    bases.dedup_by(|a, b| (*b - *a).abs() < 1e-3);
    bases
}

fn sum_strategy(max_terms: usize) -> impl Strategy<Value = ExpSum<f64>> {
    proptest::collection::vec((coefficient(), base()), 1..=max_terms).prop_map(|raw| {
        let bases = separated(raw.iter().map(|r| r.1).collect());
        let terms = bases
            .iter()
            .zip(&raw)
            .map(|(&t, &(c, _))| ExpTerm::new(c, t).unwrap())
            .collect();
        ExpSum::new(terms)
    })
}

fn pair_strategy(kind: PairKind) -> impl Strategy<Value = PairFunction<f64>> {
    (0.1f64..10.0, 0.1f64..10.0, base(), base())
        .prop_filter("distinct bases", |(_, _, a, b)| (a - b).abs() >= 1e-3)
        .prop_map(move |(c_p, c_m, a, b)| {
            let (hi, lo) = (a.max(b), a.min(b));
            let (t_p, t_m) = match kind {
                PairKind::Hpf => (hi, lo),
                PairKind::Lpf => (lo, hi),
            };
            PairFunction::new(c_p, t_p, c_m, t_m).unwrap()
        })
}

fn naive(terms: &[(f64, f64)], k: f64) -> f64 {
    terms.iter().map(|&(c, t)| c * t.powf(k)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn construction_is_canonical(
        raw in proptest::collection::vec((coefficient(), prop_oneof![Just(0.5), Just(0.25), base()]), 0..8),
        zeros in proptest::collection::vec(base(), 0..3),
        k in -5.0f64..5.0,
    ) {
        let mut terms: Vec<ExpTerm<f64>> = raw.iter().map(|&(c, t)| ExpTerm::new(c, t).unwrap()).collect();
        terms.extend(zeros.iter().map(|&t| ExpTerm::new(0.0, t).unwrap()));
        let s = ExpSum::new(terms);
        let bases: Vec<f64> = s.bases().collect();
        prop_assert!(bases.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(s.coefficients().all(|c| c != 0.0));
        let want = naive(&raw, k);
        let scale: f64 = raw.iter().map(|&(c, t)| c.abs() * t.powf(k)).sum();
        prop_assert!((s.evaluate(k).unwrap() - want).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn derivative_scales_each_coefficient(s in sum_strategy(5), j in 0u32..5) {
        let d = s.derivative(j);
        for (a, b) in s.terms().iter().zip(d.terms()) {
            let want = a.coefficient() * a.base().ln().powi(j as i32);
            prop_assert!((b.coefficient() - want).abs() <= 1e-14 * want.abs());
            prop_assert_eq!(a.base(), b.base());
        }
    }

    #[test]
    fn collapsing_shifts_preserves_values(
        raw in proptest::collection::vec((coefficient(), base(), -3.0f64..3.0), 1..6),
        k in -5.0f64..5.0,
    ) {
        let shifted: Vec<ShiftedTerm<f64>> = raw
            .iter()
            .map(|&(c, t, a)| ShiftedTerm { coefficient: c, base: t, shift: a })
            .collect();
        let collapsed = collapse_shifts(&shifted).unwrap();
        let want: f64 = raw.iter().map(|&(c, t, a)| c * t.powf(k - a)).sum();
        let scale: f64 = raw.iter().map(|&(c, t, a)| c.abs() * t.powf(k - a)).sum();
        prop_assert!((collapsed.evaluate(k).unwrap() - want).abs() <= 1e-12 * scale);
    }

    #[test]
    fn roots_respect_sign_change_bound(s in sum_strategy(6)) {
        let roots = find_roots(&s, default_window(&s), 1e-10).unwrap();
        prop_assert!(roots.len() <= sign_change_bound(&s));
    }

    #[test]
    fn roots_are_certified(s in sum_strategy(6)) {
        let tol = 1e-10;
        for r in find_roots(&s, default_window(&s), tol).unwrap() {
            let v = s.evaluate_scaled(r);
            prop_assert!(v.relative.abs() <= tol, "root {} relative value {}", r, v.relative);
        }
    }

    #[test]
    fn derivative_roots_interlace(s in sum_strategy(6)) {
        let window = default_window(&s);
        let roots = find_roots(&s, window, 1e-10).unwrap();
        let d = s.derivative(1);
        let critical = if d.is_empty() { Vec::new() } else { find_roots(&d, window, 1e-10).unwrap() };
        for w in roots.windows(2) {
            prop_assert!(
                critical.iter().any(|&c| c > w[0] && c < w[1]),
                "no critical point between {} and {}", w[0], w[1]
            );
        }
    }

    #[test]
    fn characteristic_points_climb(p in prop_oneof![pair_strategy(PairKind::Hpf), pair_strategy(PairKind::Lpf)]) {
        let points: Vec<f64> = (0..5).map(|j| p.characteristic_point(j).unwrap()).collect();
        prop_assert!(points.windows(2).all(|w| w[0] < w[1]), "{:?}", points);
        let c = p.characteristic_points();
        prop_assert!(c.zero < c.extremum && c.extremum < c.inflection);
    }

    #[test]
    fn picked_points_give_one_residual_sign(
        kind in prop_oneof![Just(PairKind::Hpf), Just(PairKind::Lpf)],
        seeds in proptest::collection::vec((0.1f64..10.0, 0.1f64..10.0, 0.05f64..0.45, 0.5f64..0.95), 1..5),
        j in 0u32..3,
        pi_residuals in any::<bool>(),
        pi_side in any::<bool>(),
    ) {
        let pairs: Vec<PairFunction<f64>> = seeds
            .iter()
            .map(|&(c_p, c_m, lo, hi)| match kind {
                PairKind::Hpf => PairFunction::new(c_p, hi, c_m, lo).unwrap(),
                PairKind::Lpf => PairFunction::new(c_p, lo, c_m, hi).unwrap(),
            })
            .collect();
        let point = PointKind::from_order(j);
        let side = if pi_residuals { ResidualSide::PiResiduals } else { ResidualSide::MiResiduals };
        let adjust = if pi_side { AdjustSide::PiSide } else { AdjustSide::MiSide };
        let k0 = pick_sync_point(&pairs, point, side).unwrap();
        if let Ok(r) = sync_at_point(&pairs, point, k0, adjust) {
            for t in &r.residuals {
                prop_assert_eq!(t.coefficient() > 0.0, pi_residuals);
            }
            for p in &r.synchronized {
                prop_assert!((p.characteristic_point(j).unwrap() - k0).abs() <= 1e-8 * k0.abs().max(1.0));
            }
        }
    }

    #[test]
    fn mi_share_is_monotone(pi_c in 0.1f64..10.0, a in base(), b in base(), j in 0u32..4, k in -20.0f64..20.0) {
        prop_assume!((a - b).abs() >= 1e-3);
        let pi = ExpTerm::new(pi_c, a).unwrap();
        let kind = PointKind::from_order(j);
        let (s0, s1) = (mi_share(&pi, b, kind, k), mi_share(&pi, b, kind, k + 0.5));
        if a > b {
            prop_assert!(s1 > s0);
        } else {
            prop_assert!(s1 < s0);
        }
    }

    #[test]
    fn split_conserves_the_shared_term(
        pi in proptest::collection::vec((0.1f64..10.0, 0.3f64..0.95), 1..5),
        mi_c in 0.1f64..10.0,
        mi_t in 0.05f64..0.25,
        j in 0u32..3,
    ) {
        let bases = separated(pi.iter().map(|p| p.1).collect());
        let terms: Vec<ExpTerm<f64>> = bases.iter().zip(&pi).map(|(&t, p)| ExpTerm::new(p.0, t).unwrap()).collect();
        let r = split_shared_mi(&terms, ExpTerm::new(-mi_c, mi_t).unwrap(), PointKind::from_order(j)).unwrap();
        let total: f64 = r.mi_shares().iter().sum();
        prop_assert!((total - mi_c).abs() <= 1e-10 * mi_c);
        for p in &r.pairs {
            let k = p.characteristic_point(j).unwrap();
            prop_assert!((k - r.common_point).abs() <= 1e-8 * k.abs().max(1.0));
        }
    }

    #[test]
    fn irr_substitution_matches_expsum(
        begin in 0.0f64..1000.0,
        flows in proptest::collection::vec((-500.0f64..500.0, 0.0f64..10.0), 1..6),
        rate in -0.9f64..2.0,
    ) {
        let flows: Vec<CashFlow<f64>> = flows.iter().map(|&(a, t)| CashFlow { amount: a, time_remaining: t }).collect();
        let s = CashFlowSchedule::new(begin, 0.0, None, flows).unwrap();
        let direct = irr_evaluate(&s, rate).unwrap();
        let sum = schedule_to_expsum(&s).unwrap();
        let via = sum.evaluate(rate.ln_1p()).unwrap();
        let scale = sum.term_scale(rate.ln_1p());
        prop_assert!((direct - via).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn irr_recovers_the_generating_rate(
        begin in 10.0f64..1000.0,
        flows in proptest::collection::vec((0.0f64..200.0, 0.0f64..5.0), 0..5),
        horizon in 5.0f64..10.0,
        rate in -0.5f64..1.0,
    ) {
        // Nonnegative flows keep the equation monotone, so the rate is unique.
        let flows: Vec<CashFlow<f64>> = flows.iter().map(|&(a, t)| CashFlow { amount: a, time_remaining: t }).collect();
        let s = CashFlowSchedule::new(begin, 0.0, Some(horizon), flows).unwrap();
        let end = irr_evaluate(&s, rate).unwrap();
        let s = s.with_end_value(end).unwrap();
        let solution = irr_solve(&s, None, 1e-12).unwrap();
        prop_assert_eq!(solution.rates.len(), 1);
        prop_assert!((solution.rates[0] - rate).abs() <= 1e-8, "{:?} vs {}", solution.rates, rate);
        let bound = 1e-10 * (s.begin_value() + s.flows().iter().map(|f| f.amount.abs()).sum::<f64>() + end);
        prop_assert!(solution.residuals.iter().all(|&r| r <= bound));
    }

    #[test]
    fn taylor_series_starts_at_total_amount(
        begin in 0.0f64..1000.0,
        flows in proptest::collection::vec((-500.0f64..500.0, 0.0f64..3.0), 1..6),
        x in -0.1f64..0.1,
    ) {
        let flows: Vec<CashFlow<f64>> = flows.iter().map(|&(a, t)| CashFlow { amount: a, time_remaining: t }).collect();
        let s = CashFlowSchedule::new(begin, 0.0, None, flows.clone()).unwrap();
        let a = taylor_coefficients(&s, 40);
        let total: f64 = begin + flows.iter().map(|f| f.amount).sum::<f64>();
        let scale: f64 = begin + flows.iter().map(|f| f.amount.abs()).sum::<f64>();
        prop_assert!((a[0] - total).abs() <= 1e-12 * scale);
        let series: f64 = a.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let exact = schedule_to_expsum(&s).unwrap().evaluate(x).unwrap();
        prop_assert!((series - exact).abs() <= 1e-10 * scale);
    }

    #[test]
    fn sign_sequence_settles_on_the_longest_flow(
        begin in 1.0f64..100.0,
        flows in proptest::collection::vec((1.0f64..100.0, any::<bool>(), 0.0f64..5.0), 1..5),
    ) {
        // The begin value has the longest time remaining, at least 0.5 ahead of every flow.
        let flows: Vec<CashFlow<f64>> = flows
            .iter()
            .map(|&(a, neg, t)| CashFlow { amount: if neg { -a } else { a }, time_remaining: t })
            .collect();
        let s = CashFlowSchedule::new(begin, 0.0, Some(5.5), flows).unwrap();
        let seq = sign_sequence(&s, 300);
        prop_assert!(seq.signs[200..].iter().all(|&v| v == 1));
        prop_assert_eq!(sign_sequence(&s, 150).change_count, seq.change_count);
        let alternations = seq.signs.iter().filter(|&&v| v != 0).collect::<Vec<_>>()
            .windows(2).filter(|w| w[0] != w[1]).count();
        prop_assert_eq!(alternations, seq.change_count);
    }

    #[test]
    fn f32_lift_roots_match(roots in proptest::collection::btree_set(1u32..10, 1..4)) {
        let roots: Vec<f32> = roots.iter().map(|&r| r as f32 * 0.75).collect();
        let lift = polynomial_lift::<f32>(&roots, 1.0).unwrap();
        let found = find_roots(&lift, default_window(&lift), 1e-5).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        for (g, r) in found.iter().zip(&roots) {
            prop_assert!((g - r.ln()).abs() <= 1e-3, "{} vs {}", g, r.ln());
        }
    }

    #[test]
    fn strong_terms_move_the_point_left(
        pi in proptest::collection::vec((0.1f64..10.0, 0.2f64..0.5), 2..5),
        mi_c in 0.1f64..10.0,
        mi_t in 0.05f64..0.15,
        strong_c in 0.01f64..1.0,
        strong_t in 0.6f64..0.95,
        j in 0u32..3,
    ) {
        let bases = separated(pi.iter().map(|p| p.1).collect());
        let terms: Vec<ExpTerm<f64>> = bases.iter().zip(&pi).map(|(&t, p)| ExpTerm::new(p.0, t).unwrap()).collect();
        let kind = PointKind::from_order(j);
        let split = split_shared_mi(&terms, ExpTerm::new(-mi_c, mi_t).unwrap(), kind).unwrap();
        let strong = ExpTerm::new(strong_c, strong_t).unwrap();
        if let Ok(grown) = add_strong_terms(&split, &[strong], kind) {
            prop_assert!(grown.common_point < split.common_point);
            let shares = &grown.strong[0].shares;
            prop_assert!(shares.iter().all(|&s| s > 0.0));
            let total: f64 = shares.iter().sum();
            prop_assert!((total - strong_c).abs() <= 1e-10 * strong_c);
            for c in grown.composites() {
                let v = c.derivative(j).evaluate_scaled(grown.common_point);
                prop_assert!(v.relative.abs() <= 1e-8, "composite derivative {}", v.relative);
            }
        }
    }
}
