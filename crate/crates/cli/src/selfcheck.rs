//! `eby selfcheck`: a quick pass over the library's invariants.

use eby_core::calibration::{by_calibrator, calibrate_ci, power_calibrator};
use eby_core::evalues::{hoeffding_generalized_eci, hoeffding_plain_ci, HoeffdingBatchSpec};
use eby_core::experiments::{
    run_ebh_reduction, run_sharpness, EbhReductionConfig, SharpnessConfig, SharpnessMode,
};
use eby_core::metrics::{monte_carlo, replication_rng};
use eby_core::procedures::{
    bh_select, by_dependent, e_bh_select, e_by, SelectionOutcome,
};
use rand::Rng;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
}

fn calibrator_integrals() -> bool {
    let by = [0.05, 0.1, 0.2].iter().all(|&d| {
        [2, 10, 100]
            .iter()
            .all(|&k| (by_calibrator(d, k).unwrap().integral() - 1.0).abs() < 1e-6)
    });
    let power = [0.1, 0.5, 0.9]
        .iter()
        .all(|&kappa| (power_calibrator(kappa).unwrap().integral() - 1.0).abs() < 1e-8);
    by && power
}

fn by_embedding() -> bool {
    let mut rng = replication_rng(1, 0);
    [2usize, 5, 10].iter().all(|&k| {
        let families: Vec<_> = (0..k)
            .map(|_| {
                let spec = HoeffdingBatchSpec::new(rng.random_range(-1.0..1.0), rng.random_range(1..500), -1.0, 1.0).unwrap();
                hoeffding_plain_ci(&spec)
            })
            .collect();
        let cal = by_calibrator(0.1, k).unwrap();
        let calibrated: Vec<_> = families.iter().map(|f| calibrate_ci(f, &cal)).collect();
        (1..=k).all(|s| {
            let sel = SelectionOutcome::new(k, 0..s, "first").unwrap();
            by_dependent(&families, &sel, 0.1).unwrap().entries
                .iter()
                .zip(&e_by(&calibrated, &sel, 0.1).unwrap().entries)
                .all(|(a, b)| a.region == b.region)
        })
    })
}

fn selection_oracles() -> bool {
    let mut rng = replication_rng(2, 0);
    (0..200).all(|_| {
        let k = rng.random_range(1..=12);
        let delta = rng.random_range(0.01..0.5);
        let p: Vec<f64> = (0..k).map(|_| rng.random::<f64>().powi(3)).collect();
        let e: Vec<f64> = (0..k).map(|_| (rng.random_range(-2.0..6.0f64)).exp()).collect();
        let bh_k = (0..=k)
            .filter(|&j| j == 0 || p.iter().filter(|&&x| x <= delta * j as f64 / k as f64).count() >= j)
            .max()
            .unwrap();
        let ebh_k = (0..=k)
            .filter(|&j| j == 0 || e.iter().filter(|&&x| x >= k as f64 / (delta * j as f64)).count() >= j)
            .max()
            .unwrap();
        bh_select(&p, delta).len() == bh_k && e_bh_select(&e, delta).len() == ebh_k
    })
}

fn hoeffding_identity() -> bool {
    let mut rng = replication_rng(3, 0);
    (0..100).all(|_| {
        let spec = HoeffdingBatchSpec::new(rng.random::<f64>(), rng.random_range(1..10_000), 0.0, 1.0).unwrap();
        let ap = rng.random_range(1e-4..0.99);
        let a = hoeffding_generalized_eci(&spec, ap).unwrap().evaluate(ap).unwrap();
        let b = hoeffding_plain_ci(&spec).evaluate(ap).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
        close(a.lower().unwrap(), b.lower().unwrap()) && close(a.upper().unwrap(), b.upper().unwrap())
    })
}

fn reduction() -> bool {
    let config = EbhReductionConfig {
        k: 40,
        non_nulls: 8,
        signal: 3.5,
        lambda: 3.0,
        rho: 0.5,
        delta: 0.1,
        reps: 300,
        master_seed: 4,
    };
    run_ebh_reduction(&config).map(|r| r.mismatches == 0).unwrap_or(false)
}

fn determinism() -> bool {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(|pool| pool.install(|| monte_carlo("u", 500, 5, |rng| rng.random::<f64>())))
    };
    match (run(1), run(4)) {
        (Ok(Ok(a)), Ok(Ok(b))) => a.mean.to_bits() == b.mean.to_bits(),
        _ => false,
    }
}

fn sharpness_bound() -> bool {
    let config = SharpnessConfig {
        k: 200,
        gamma: 2.0,
        delta: 0.1,
        epsilon: 1e-3,
        reps: 2000,
        master_seed: 6,
        mode: SharpnessMode::ExactBernoulli,
    };
    run_sharpness(&config)
        .map(|s| s.mean <= 0.1 + 3.0 * s.std_err)
        .unwrap_or(false)
}

pub fn run_checks() -> Vec<Check> {
    let checks: [(&'static str, fn() -> bool); 7] = [
        ("calibrator integrals", calibrator_integrals),
        ("BY equals e-BY on BY-calibrated CIs", by_embedding),
        ("BH and e-BH match brute force", selection_oracles),
        ("tuned Hoeffding e-CI equals plain CI at its level", hoeffding_identity),
        ("e-BH reduction: FCP equals FDP", reduction),
        ("Monte Carlo independent of thread count", determinism),
        ("sharpness FCR within bound", sharpness_bound),
    ];
    checks
        .into_iter()
        .map(|(name, f)| Check { name, passed: f() })
        .collect()
}
