//! Split-likelihood universal inference for the mean of a unit-variance
//! Gaussian.
//!
//! `D1` fits the alternative `N(μ̂₁, 1)`; the likelihood ratio on `D0` against
//! the best `N(θ, 1)` has the closed form
//! `exp(n₀((μ̂₀ - θ)² - (μ̂₀ - μ̂₁)²)/2)`.

use super::EValueFamily;
use crate::error::{Error, Result};
use crate::regions::{ConfidenceRegion, EciFamily, EciKind};

/// Splits `data` into halves; with an odd length the extra element goes to
/// the second half.
pub fn split_even(data: &[f64]) -> (&[f64], &[f64]) {
    data.split_at(data.len() / 2)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sufficient statistics of a universal-inference split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianUi {
    pub n0: usize,
    pub mean0: f64,
    pub mean1: f64,
}

impl GaussianUi {
    pub fn new(d0: &[f64], d1: &[f64]) -> Result<Self> {
        if d0.is_empty() || d1.is_empty() {
            return Err(Error::EmptySplit);
        }
        Ok(Self {
            n0: d0.len(),
            mean0: mean(d0),
            mean1: mean(d1),
        })
    }

    /// Uses [`split_even`].
    pub fn from_sample(data: &[f64]) -> Result<Self> {
        let (d0, d1) = split_even(data);
        Self::new(d0, d1)
    }

    pub fn log_evalue(&self, theta: f64) -> f64 {
        let a = self.mean0 - theta;
        let b = self.mean0 - self.mean1;
        self.n0 as f64 * (a * a - b * b) / 2.0
    }

    pub fn evalue(&self, theta: f64) -> f64 {
        self.log_evalue(theta).exp()
    }

    pub fn family(&self) -> EValueFamily {
        let ui = *self;
        EValueFamily::new(move |theta| ui.evalue(theta))
    }

    /// Closed-form e-CI `μ̂₀ ± sqrt((μ̂₀ - μ̂₁)² + 2·log(1/α)/n₀)`.
    pub fn eci(&self) -> EciFamily {
        let ui = *self;
        EciFamily::new(EciKind::FromEvalue, move |alpha| {
            if alpha <= 0.0 {
                return ConfidenceRegion::FullSpace;
            }
            let b = ui.mean0 - ui.mean1;
            let half = (b * b + 2.0 * (1.0 / alpha).ln() / ui.n0 as f64).sqrt();
            ConfidenceRegion::symmetric_open(ui.mean0, half).unwrap_or(ConfidenceRegion::FullSpace)
        })
    }
}

/// Universal-inference e-value for `θ` from the split `(d0, d1)`.
pub fn ui_evalue_gaussian(d0: &[f64], d1: &[f64], theta: f64) -> Result<f64> {
    Ok(GaussianUi::new(d0, d1)?.evalue(theta))
}
