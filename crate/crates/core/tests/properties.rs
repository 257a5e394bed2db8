use eby_core::calibration::{by_calibrator, calibrate_ci, p_dual, power_calibrator, Calibrator, DualGrid};
use eby_core::evalues::{
    hoeffding_evalue, hoeffding_generalized_eci, hoeffding_plain_ci, hoeffding_pvalue, indicator_eci,
    EProcessState, GaussianUi, HoeffdingBatchSpec,
};
use eby_core::metrics::{fcp, fdp};
use eby_core::procedures::{
    bh_select, by_dependent, by_independent, e_bh_select, e_by, harmonic, SelectionOutcome,
};
use eby_core::regions::{contains_region, level_grid};
use eby_core::{ConfidenceRegion, EciFamily, EciKind};
use proptest::prelude::*;

fn region() -> impl Strategy<Value = ConfidenceRegion> {
    let end = -2i32..=2;
    prop_oneof![
        (end.clone(), end.clone(), any::<bool>(), any::<bool>()).prop_map(|(a, b, lo_open, hi_open)| {
            let (lo, hi) = (a.min(b) as f64, a.max(b) as f64);
            ConfidenceRegion::interval(lo, hi, lo_open, hi_open).unwrap()
        }),
        (end.clone(), any::<bool>())
            .prop_map(|(a, open)| ConfidenceRegion::half_line_above(a as f64, open).unwrap()),
        Just(ConfidenceRegion::FullSpace),
        Just(ConfidenceRegion::EmptySet),
        (end.clone(), end).prop_map(|(a, b)| {
            ConfidenceRegion::null_complement(a.min(b) as f64, a.max(b) as f64).unwrap()
        }),
    ]
}

/// Half-integers between and beyond the integer endpoints used by `region`,
/// plus the endpoints themselves: enough points to separate any two regions.
fn probe_points() -> Vec<f64> {
    let mut pts: Vec<f64> = (-6..=6).map(|i| i as f64 / 2.0).collect();
    pts.extend([-1e300, 1e300]);
    pts
}

/// Nested step family: thresholds increasing in (0, 1), intervals shrinking.
fn step_family() -> impl Strategy<Value = EciFamily> {
    (
        prop::collection::vec((0.001f64..0.999, 0.0f64..0.3, 0.0f64..0.3), 0..5),
        -1.0f64..1.0,
        0.5f64..3.0,
    )
        .prop_map(|(raw, center, half)| {
            let mut thresholds: Vec<f64> = raw.iter().map(|r| r.0).collect();
            thresholds.sort_by(f64::total_cmp);
            thresholds.dedup();
            let (mut lo, mut hi) = (center - half, center + half);
            let base = ConfidenceRegion::closed_interval(lo, hi).unwrap();
            let steps = thresholds
                .iter()
                .zip(&raw)
                .map(|(&t, &(_, a, b))| {
                    let w = hi - lo;
                    lo += a * w;
                    hi -= b * w;
                    (t, ConfidenceRegion::closed_interval(lo, hi).unwrap())
                })
                .collect();
            EciFamily::step(EciKind::PlainCi, base, steps).unwrap()
        })
}

fn hoeffding_spec() -> impl Strategy<Value = HoeffdingBatchSpec> {
    (0.0f64..1.0, 1u64..5000).prop_map(|(m, n)| HoeffdingBatchSpec::new(m, n, 0.0, 1.0).unwrap())
}

fn regions_close(a: &ConfidenceRegion, b: &ConfidenceRegion, rel: f64) -> bool {
    match (a, b) {
        (
            ConfidenceRegion::Interval { lo: l1, hi: h1, lo_open: lo1, hi_open: ho1 },
            ConfidenceRegion::Interval { lo: l2, hi: h2, lo_open: lo2, hi_open: ho2 },
        ) => {
            let close = |x: f64, y: f64| (x - y).abs() <= rel * x.abs().max(y.abs()).max(1e-300);
            close(*l1, *l2) && close(*h1, *h2) && lo1 == lo2 && ho1 == ho2
        }
        _ => a == b,
    }
}

/// Brute-force BH: the largest k with at least k p-values at or below δk/K.
fn bh_oracle(p: &[f64], delta: f64) -> Vec<usize> {
    let k = p.len();
    let t = |j: usize| delta * j as f64 / k as f64;
    let best = (1..=k)
        .filter(|&j| p.iter().filter(|&&x| x <= t(j)).count() >= j)
        .max()
        .unwrap_or(0);
    if best == 0 {
        return vec![];
    }
    (0..k).filter(|&i| p[i] <= t(best)).collect()
}

/// Brute-force e-BH: the largest k with at least k e-values at or above K/(δk).
fn ebh_oracle(e: &[f64], delta: f64) -> Vec<usize> {
    let k = e.len();
    let t = |j: usize| k as f64 / (delta * j as f64);
    let best = (1..=k)
        .filter(|&j| e.iter().filter(|&&x| x >= t(j)).count() >= j)
        .max()
        .unwrap_or(0);
    if best == 0 {
        return vec![];
    }
    (0..k).filter(|&i| e[i] >= t(best)).collect()
}

/// Values drawn from a short list half the time so that ties are common.
fn tied_or_free(lo: f64, hi: f64, list: &'static [f64]) -> impl Strategy<Value = f64> {
    prop_oneof![lo..hi, prop::sample::select(list)]
}

const P_LIST: &[f64] = &[0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.5, 1.0];
const E_LIST: &[f64] = &[0.0, 1.0, 10.0, 20.0, 50.0, 100.0, 1e3];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn subset_matches_pointwise_inclusion(inner in region(), outer in region()) {
        let pointwise = probe_points()
            .into_iter()
            .all(|t| !inner.covers(t) || outer.covers(t));
        prop_assert_eq!(contains_region(&inner, &outer), pointwise);
    }

    #[test]
    fn covers_respects_inclusion(inner in region(), outer in region(), theta in -3.0f64..3.0) {
        if inner.is_subset_of(&outer) && inner.covers(theta) {
            prop_assert!(outer.covers(theta));
        }
    }

    #[test]
    fn bh_matches_oracle(
        p in prop::collection::vec(tied_or_free(0.0, 1.0, P_LIST), 1..=12),
        delta in 0.01f64..0.5,
    ) {
        prop_assert_eq!(bh_select(&p, delta).selected, bh_oracle(&p, delta));
    }

    #[test]
    fn e_bh_matches_oracle(
        e in prop::collection::vec(tied_or_free(0.0, 500.0, E_LIST), 1..=12),
        delta in 0.01f64..0.5,
    ) {
        prop_assert_eq!(e_bh_select(&e, delta).selected, ebh_oracle(&e, delta));
    }

    #[test]
    fn reduction_fcp_equals_fdp(
        e in prop::collection::vec(tied_or_free(0.0, 500.0, E_LIST), 1..=12),
        nulls in prop::collection::vec(any::<bool>(), 12),
        delta in 0.01f64..0.5,
    ) {
        let k = e.len();
        let is_null = &nulls[..k];
        let theta: Vec<f64> = is_null.iter().map(|&n| if n { 0.0 } else { 1.0 }).collect();
        let selection = e_bh_select(&e, delta);
        let ecis: Vec<_> = e.iter().map(|&x| indicator_eci(x, 0.0, 0.0).unwrap()).collect();
        let report = e_by(&ecis, &selection, delta).unwrap();
        prop_assert_eq!(fcp(&report, &theta), fdp(&selection.selected, is_null));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pvalue_and_plain_ci_are_dual(spec in hoeffding_spec(), theta in -0.5f64..1.5, alpha in 0.001f64..0.999) {
        let p = hoeffding_pvalue(&spec, theta);
        prop_assume!((p - alpha).abs() > 1e-9);
        let covered = hoeffding_plain_ci(&spec).evaluate(alpha).unwrap().covers(theta);
        prop_assert_eq!(covered, p > alpha);
    }

    #[test]
    fn generalized_matches_plain_at_alpha_prime(spec in hoeffding_spec(), ap in 1e-6f64..0.999) {
        let a = hoeffding_generalized_eci(&spec, ap).unwrap().evaluate(ap).unwrap();
        let b = hoeffding_plain_ci(&spec).evaluate(ap).unwrap();
        prop_assert!(regions_close(&a, &b, 1e-12), "{a} vs {b}");
    }

    #[test]
    fn families_are_monotone(
        spec in hoeffding_spec(),
        ap in 0.001f64..0.5,
        steps in step_family(),
        data in prop::collection::vec(-3.0f64..3.0, 2..40),
        kappa in 0.05f64..0.95,
    ) {
        let grid = level_grid(100);
        let plain = hoeffding_plain_ci(&spec);
        let mut state = EProcessState::new(-3.0, 3.0).unwrap();
        for &x in &data {
            state = state.update(x, 0.2).unwrap();
        }
        let families = [
            hoeffding_generalized_eci(&spec, ap).unwrap(),
            plain.clone(),
            state.as_eci(),
            GaussianUi::from_sample(&data).unwrap().eci(),
            calibrate_ci(&plain, &power_calibrator(kappa).unwrap()),
            calibrate_ci(&steps, &by_calibrator(0.1, 7).unwrap()),
            steps,
        ];
        for f in &families {
            prop_assert!(f.is_monotone_on(&grid));
        }
    }

    #[test]
    fn p_dual_inverts_the_evalue(spec in hoeffding_spec(), ap in 0.001f64..0.5, theta in -0.5f64..1.5) {
        let e = hoeffding_evalue(&spec, ap).unwrap().evaluate(theta);
        let eci = hoeffding_generalized_eci(&spec, ap).unwrap();
        let expected = (1.0 / e).min(1.0);
        prop_assume!(expected > 1e-15);
        let got = p_dual(&eci, theta, DualGrid::default());
        prop_assert!((got - expected).abs() <= 1e-6 * expected, "{got} vs {expected}");
    }

    #[test]
    fn by_embedding_step(family in step_family(), k in 1usize..30, delta in 0.01f64..0.5) {
        let cal = calibrate_ci(&family, &by_calibrator(delta, k).unwrap());
        let ell = harmonic(k);
        for j in 1..=k {
            let direct = family.evaluate(delta * j as f64 / (k as f64 * ell)).unwrap();
            let via = cal.evaluate(delta * j as f64 / k as f64).unwrap();
            prop_assert_eq!(direct, via);
        }
    }

    #[test]
    fn by_embedding_hoeffding(spec in hoeffding_spec(), k in 1usize..30, delta in 0.01f64..0.5) {
        let family = hoeffding_plain_ci(&spec);
        let cal = calibrate_ci(&family, &by_calibrator(delta, k).unwrap());
        let ell = harmonic(k);
        for j in 1..=k {
            let direct = family.evaluate(delta * j as f64 / (k as f64 * ell)).unwrap();
            let via = cal.evaluate(delta * j as f64 / k as f64).unwrap();
            prop_assert!(regions_close(&direct, &via, 1e-9), "{direct} vs {via}");
        }
    }

    #[test]
    fn level_dominance(
        k in 1usize..40,
        picks in prop::collection::vec(any::<bool>(), 40),
        delta in 0.01f64..0.5,
    ) {
        let selected: Vec<usize> = (0..k).filter(|&i| picks[i]).collect();
        let sel = SelectionOutcome::new(k, selected, "test").unwrap().with_stable_r_min();
        let fams: Vec<_> = (0..k)
            .map(|_| EciFamily::constant(EciKind::FromEvalue, ConfidenceRegion::FullSpace))
            .collect();
        let e = e_by(&fams, &sel, delta).unwrap();
        let dep = by_dependent(&fams, &sel, delta).unwrap();
        let ind = by_independent(&fams, &sel, delta).unwrap();
        for ((a, b), c) in e.entries.iter().zip(&dep.entries).zip(&ind.entries) {
            prop_assert_eq!(b.alpha, a.alpha / harmonic(k));
            prop_assert!(c.alpha >= a.alpha);
        }
    }

    #[test]
    fn calibrators_are_valid(kappa in 0.01f64..0.99, delta in 0.01f64..0.99, k in 1usize..200) {
        let cals: [Calibrator; 2] = [power_calibrator(kappa).unwrap(), by_calibrator(delta, k).unwrap()];
        for cal in &cals {
            let values: Vec<f64> = (0..=1000).map(|i| cal.f(i as f64 / 1000.0)).collect();
            prop_assert!(values.windows(2).all(|w| w[1] <= w[0]), "{}", cal.label());
            prop_assert!(cal.integral() <= 1.0 + 1e-6, "{}", cal.label());
        }
    }

    #[test]
    fn proportions_stay_in_unit_interval(
        rejected in prop::collection::btree_set(0usize..12, 0..12),
        nulls in prop::collection::vec(any::<bool>(), 12),
    ) {
        let rejected: Vec<usize> = rejected.into_iter().collect();
        let v = fdp(&rejected, &nulls);
        prop_assert!((0.0..=1.0).contains(&v));
        if rejected.is_empty() {
            prop_assert_eq!(v, 0.0);
        }
    }
}
