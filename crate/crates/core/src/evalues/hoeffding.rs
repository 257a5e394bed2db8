//! Batch Hoeffding e-values, e-CIs, plain CIs and p-values for the mean of
//! observations bounded in `[range_lo, range_hi]`.
//!
//! With span `r = range_hi - range_lo`, the sample mean of `n` observations
//! satisfies `E exp(λ(θ̂ - θ)) ≤ exp(λ² r² / (8n))`.

use super::EValueFamily;
use crate::error::{Error, Result};
use crate::regions::{ConfidenceRegion, EciFamily, EciKind};

/// Sample mean, sample size and declared range of a bounded sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingBatchSpec {
    pub sample_mean: f64,
    pub n: u64,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl HoeffdingBatchSpec {
    pub fn new(sample_mean: f64, n: u64, range_lo: f64, range_hi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("Hoeffding spec needs n >= 1".into()));
        }
        if !(range_lo.is_finite() && range_hi.is_finite() && range_lo < range_hi) {
            return Err(Error::InvalidSpec(format!(
                "range [{range_lo}, {range_hi}] must be finite and nondegenerate"
            )));
        }
        if !(range_lo..=range_hi).contains(&sample_mean) {
            return Err(Error::InvalidSpec(format!(
                "sample mean {sample_mean} outside [{range_lo}, {range_hi}]"
            )));
        }
        Ok(Self {
            sample_mean,
            n,
            range_lo,
            range_hi,
        })
    }

    pub fn from_samples(samples: &[f64], range_lo: f64, range_hi: f64) -> Result<Self> {
        if let Some(&x) = samples.iter().find(|x| !(range_lo..=range_hi).contains(*x)) {
            return Err(Error::OutOfRange {
                x,
                lo: range_lo,
                hi: range_hi,
            });
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        Self::new(
            mean.clamp(range_lo, range_hi),
            samples.len() as u64,
            range_lo,
            range_hi,
        )
    }

    pub fn span(&self) -> f64 {
        self.range_hi - self.range_lo
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(alpha))
    }
}

/// `r·sqrt(log(2/α)/(2n))`, the half-width of the plain Hoeffding CI.
pub fn plain_half_width(n: u64, span: f64, alpha: f64) -> f64 {
    let l = (2.0 / alpha).ln();
    span * (l / (2.0 * n as f64)).sqrt()
}

/// Half-width of the Hoeffding e-CI tuned for level `α'`, evaluated at `α`:
/// `r·sqrt(L/(2n)) · (L + L')/(2·sqrt(L·L'))` with `L = log(2/α)`,
/// `L' = log(2/α')`. Equals [`plain_half_width`] at `α = α'`.
pub fn generalized_half_width(n: u64, span: f64, alpha: f64, alpha_prime: f64) -> f64 {
    let l = (2.0 / alpha).ln();
    let lp = (2.0 / alpha_prime).ln();
    let h = span * (l / (2.0 * n as f64)).sqrt();
    let g = (l + lp) / (2.0 * (l * lp).sqrt());
    h * g
}

/// Hoeffding e-CI with a fixed bet tuned for level `α'`.
///
/// Stays an e-CI at every `α`; it is tightest at `α = α'`.
pub fn hoeffding_generalized_eci(spec: &HoeffdingBatchSpec, alpha_prime: f64) -> Result<EciFamily> {
    check_level(alpha_prime)?;
    let spec = *spec;
    Ok(EciFamily::new(EciKind::FromEvalue, move |alpha| {
        if alpha <= 0.0 {
            return ConfidenceRegion::FullSpace;
        }
        let half = generalized_half_width(spec.n, spec.span(), alpha, alpha_prime);
        ConfidenceRegion::symmetric_open(spec.sample_mean, half).unwrap_or(ConfidenceRegion::FullSpace)
    }))
}

/// The ordinary Hoeffding CI `θ̂ ± (r/2)·sqrt(2 log(2/α)/n)`. Not an e-CI.
pub fn hoeffding_plain_ci(spec: &HoeffdingBatchSpec) -> EciFamily {
    let spec = *spec;
    EciFamily::new(EciKind::PlainCi, move |alpha| {
        if alpha <= 0.0 {
            return ConfidenceRegion::FullSpace;
        }
        let l = (2.0 / alpha).ln();
        let half = 0.5 * spec.span() * (2.0 * l / spec.n as f64).sqrt();
        ConfidenceRegion::symmetric_open(spec.sample_mean, half).unwrap_or(ConfidenceRegion::FullSpace)
    })
}

/// Two-sided Hoeffding p-value `min(1, 2·exp(-2n(θ̂ - θ₀)²/r²))`.
pub fn hoeffding_pvalue(spec: &HoeffdingBatchSpec, null_mean: f64) -> f64 {
    let d = spec.sample_mean - null_mean;
    let r = spec.span();
    (2.0 * (-2.0 * spec.n as f64 * d * d / (r * r)).exp()).min(1.0)
}

/// The e-value family behind [`hoeffding_generalized_eci`]:
/// `max(e^{λd - λ²r²/(8n)}, e^{-λd - λ²r²/(8n)}) / 2` with `d = θ̂ - θ` and
/// `λ = sqrt(8n·log(2/α'))/r`.
pub fn hoeffding_evalue(spec: &HoeffdingBatchSpec, alpha_prime: f64) -> Result<EValueFamily> {
    check_level(alpha_prime)?;
    let spec = *spec;
    let n = spec.n as f64;
    let r = spec.span();
    let lambda = (8.0 * n * (2.0 / alpha_prime).ln()).sqrt() / r;
    let penalty = lambda * lambda * r * r / (8.0 * n);
    Ok(EValueFamily::new(move |theta| {
        let d = spec.sample_mean - theta;
        0.5 * (lambda * d.abs() - penalty).exp()
    }))
}
