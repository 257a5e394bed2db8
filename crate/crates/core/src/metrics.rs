//! Error proportions and a seeded, parallel Monte-Carlo harness.
//!
//! Replication `r` of a run with master seed `m` draws from
//! `ChaCha8Rng::seed_from_u64(stream_seed(m, r))`, so results do not depend
//! on how replications are scheduled across threads. Reductions run
//! sequentially in replication order.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::procedures::{Direction, ProcedureReport};

/// Fraction of reported regions that miss the true parameter; 0 when nothing
/// is reported.
pub fn fcp(report: &ProcedureReport, theta_true: &[f64]) -> f64 {
    let misses = report
        .entries
        .iter()
        .filter(|e| !e.region.covers(theta_true[e.index]))
        .count();
    misses as f64 / report.entries.len().max(1) as f64
}

/// Fraction of rejections that are nulls; 0 when nothing is rejected.
pub fn fdp(rejected: &[usize], is_null: &[bool]) -> f64 {
    let false_ones = rejected.iter().filter(|&&i| is_null[i]).count();
    false_ones as f64 / rejected.len().max(1) as f64
}

/// Fraction of rejections whose declared sign is wrong. `θ = 0` is wrong for
/// either sign.
pub fn directional_fdp(
    rejected: &[usize],
    directions: &BTreeMap<usize, Direction>,
    theta_true: &[f64],
) -> Result<f64> {
    let mut errors = 0usize;
    for &i in rejected {
        let wrong = match directions.get(&i) {
            Some(Direction::Positive) => theta_true[i] <= 0.0,
            Some(Direction::Negative) => theta_true[i] >= 0.0,
            None => return Err(Error::MissingDirection(i)),
        };
        errors += usize::from(wrong);
    }
    Ok(errors as f64 / rejected.len().max(1) as f64)
}

/// Mean and standard error of a Monte-Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub mean: f64,
    pub std_err: f64,
    pub reps: usize,
    pub metric_label: String,
}

impl MetricsSummary {
    /// Sample mean and `sd/√n` with the `n - 1` variance denominator.
    pub fn from_samples(label: impl Into<String>, samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::TooFewReplications(n));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        Ok(Self {
            mean,
            std_err: (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt(),
            reps: n,
            metric_label: label.into(),
        })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(master) ^ rep)`, the seed of replication `rep`.
pub fn stream_seed(master: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(master) ^ rep)
}

pub fn replication_rng(master: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, rep))
}

/// Runs `f` once per replication, in parallel, and returns the results in
/// replication order.
pub fn replicate<T, F>(reps: usize, master_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| f(&mut replication_rng(master_seed, rep)))
        .collect()
}

/// Estimates `E[metric]` from `reps` seeded replications.
pub fn monte_carlo<F>(label: &str, reps: usize, master_seed: u64, metric: F) -> Result<MetricsSummary>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if reps < 2 {
        return Err(Error::TooFewReplications(reps));
    }
    MetricsSummary::from_samples(label, &replicate(reps, master_seed, metric))
}
