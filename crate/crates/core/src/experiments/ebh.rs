//! e-BH as e-BY applied to indicator e-CIs.
//!
//! Each parameter has one observation `X_i ~ N(θ_i, 1)` (optionally
//! equicorrelated), tested for `θ_i = 0` with the likelihood-ratio e-value
//! `exp(λX_i - λ²/2)`. Reporting the indicator e-CI of every e-BH rejection
//! at level `δ|S|/K` miscovers exactly the false discoveries.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalues::indicator_eci;
use crate::metrics::{fcp, fdp, replicate, MetricsSummary};
use crate::procedures::{e_by, e_bh_select};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EbhReductionConfig {
    pub k: usize,
    /// Number of nonzero means; they come first.
    pub non_nulls: usize,
    pub signal: f64,
    pub lambda: f64,
    /// Common correlation of the observations, in `[0, 1)`.
    pub rho: f64,
    pub delta: f64,
    pub reps: usize,
    pub master_seed: u64,
}

impl EbhReductionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.non_nulls > self.k {
            return Err(Error::InvalidSpec("need K >= 1 and non_nulls <= K".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidLevel(self.delta));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidSpec(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.lambda.is_finite() && self.signal.is_finite()) {
            return Err(Error::InvalidSpec("lambda and signal must be finite".into()));
        }
        if self.reps < 2 {
            return Err(Error::TooFewReplications(self.reps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbhReductionResult {
    pub fcr: MetricsSummary,
    pub fdr: MetricsSummary,
    /// Replications where FCP and FDP differ.
    pub mismatches: usize,
    pub selected_mean: f64,
}

pub fn run_ebh_reduction(config: &EbhReductionConfig) -> Result<EbhReductionResult> {
    config.validate()?;
    let theta: Vec<f64> = (0..config.k)
        .map(|i| if i < config.non_nulls { config.signal } else { 0.0 })
        .collect();
    let is_null: Vec<bool> = theta.iter().map(|&t| t == 0.0).collect();
    let outcomes = replicate(config.reps, config.master_seed, |rng| -> Result<(f64, f64, usize)> {
        let common: f64 = rng.sample(StandardNormal);
        let evalues: Vec<f64> = theta
            .iter()
            .map(|&t| {
                let own: f64 = rng.sample(StandardNormal);
                let x = t + config.rho.sqrt() * common + (1.0 - config.rho).sqrt() * own;
                (config.lambda * x - config.lambda * config.lambda / 2.0).exp()
            })
            .collect();
        let selection = e_bh_select(&evalues, config.delta);
        let ecis = evalues
            .iter()
            .map(|&e| indicator_eci(e, 0.0, 0.0))
            .collect::<Result<Vec<_>>>()?;
        let report = e_by(&ecis, &selection, config.delta)?;
        Ok((fcp(&report, &theta), fdp(&selection.selected, &is_null), selection.len()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let fcps: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let fdps: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    Ok(EbhReductionResult {
        fcr: MetricsSummary::from_samples("e-BY FCR", &fcps)?,
        fdr: MetricsSummary::from_samples("e-BH FDR", &fdps)?,
        mismatches: outcomes.iter().filter(|o| o.0 != o.1).count(),
        selected_mean: outcomes.iter().map(|o| o.2 as f64).sum::<f64>() / outcomes.len() as f64,
    })
}
