//! The two-step Brownian construction whose e-BY false coverage rate tends
//! to `δ` as all drifts increase to 0.
//!
//! Step 1 runs each `W_i` (drift `-ε`, unit volatility, started at 0) until
//! it reaches `γ - 1` (selected) or `-1`. Step 2 continues selected paths
//! until `β - 1` or `-1`, with `β = K/(δ|S|)`; reaching `β - 1` means the
//! e-BY region at level `1/β` excludes 0 and therefore misses `-ε`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{monte_carlo, MetricsSummary};

/// Probability that Brownian motion with drift `mu` rises by `a` before it
/// falls by `b`: `1 - e^{-μb} sinh(|μ|a)/sinh(|μ|(a+b))`, and `b/(a+b)` at
/// `μ = 0`.
pub fn hitting_prob(mu: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidBoundary { a, b });
    }
    if mu == 0.0 {
        return Ok(b / (a + b));
    }
    let m = mu.abs();
    // sinh(ma)/sinh(m(a+b)) = e^{-mb} (1 - e^{-2ma}) / (1 - e^{-2m(a+b)})
    let ratio = (-2.0 * m * a).exp_m1() / (-2.0 * m * (a + b)).exp_m1();
    let p = 1.0 - (-mu * b - m * b).exp() * ratio;
    Ok(p.clamp(0.0, 1.0))
}

/// `P(i ∈ S) = f(-ε, γ-1, 1)`, and 1 when `γ = 1`.
pub fn selection_probability(epsilon: f64, gamma: f64) -> Result<f64> {
    if gamma == 1.0 {
        Ok(1.0)
    } else {
        hitting_prob(-epsilon, gamma - 1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SharpnessMode {
    /// Samples the step-1 and step-2 hitting events from their exact
    /// probabilities.
    ExactBernoulli,
    /// Euler paths with step `h`; the e-BY region is evaluated on the path.
    DiscretizedPath { h: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    pub k: usize,
    pub gamma: f64,
    pub delta: f64,
    /// All drifts equal `-epsilon`.
    pub epsilon: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub mode: SharpnessMode,
}

impl SharpnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidSpec("K must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidLevel(self.delta));
        }
        if !(self.gamma >= 1.0 && self.gamma < 1.0 / self.delta) {
            return Err(Error::InvalidGamma {
                gamma: self.gamma,
                beta: 1.0 / self.delta,
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if let SharpnessMode::DiscretizedPath { h } = self.mode {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidSpec(format!("step h must be positive, got {h}")));
            }
        }
        Ok(())
    }

    fn beta(&self, selected: usize) -> Result<f64> {
        let beta = self.k as f64 / (self.delta * selected as f64);
        if beta <= self.gamma {
            return Err(Error::InvalidGamma {
                gamma: self.gamma,
                beta,
            });
        }
        Ok(beta)
    }
}

fn exact_fcp(config: &SharpnessConfig, p_select: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let selected = (0..config.k).filter(|_| rng.random::<f64>() < p_select).count();
    if selected == 0 {
        return Ok(0.0);
    }
    let beta = config.beta(selected)?;
    let p_miss = hitting_prob(-config.epsilon, beta - config.gamma, config.gamma)?;
    let misses = (0..selected).filter(|_| rng.random::<f64>() < p_miss).count();
    Ok(misses as f64 / selected as f64)
}

/// A discretized path of `W` and the running minimum of `(1 + W_s)/s`.
struct Path {
    t: f64,
    w: f64,
    inf_ratio: f64,
}

impl Path {
    fn run_until(&mut self, upper: f64, drift: f64, h: f64, rng: &mut ChaCha8Rng) -> bool {
        let sd = h.sqrt();
        while self.w < upper && self.w > -1.0 {
            let z: f64 = rng.sample(StandardNormal);
            self.w += drift * h + sd * z;
            self.t += h;
            self.inf_ratio = self.inf_ratio.min((1.0 + self.w) / self.t);
        }
        self.w >= upper
    }
}

fn path_fcp(config: &SharpnessConfig, h: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let drift = -config.epsilon;
    let mut paths: Vec<Path> = Vec::new();
    for _ in 0..config.k {
        let mut path = Path {
            t: 0.0,
            w: 0.0,
            inf_ratio: f64::INFINITY,
        };
        if path.run_until(config.gamma - 1.0, drift, h, rng) {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Ok(0.0);
    }
    let selected = paths.len();
    let beta = config.beta(selected)?;
    let mut misses = 0usize;
    for mut path in paths {
        path.run_until(beta - 1.0, drift, h, rng);
        let lower = ((1.0 + path.w - beta) / path.t).min(path.inf_ratio);
        // Region is (lower, ∞).
        if drift <= lower {
            misses += 1;
        }
    }
    Ok(misses as f64 / selected as f64)
}

/// Empirical false coverage rate of e-BY in the sharpness construction.
pub fn run_sharpness(config: &SharpnessConfig) -> Result<MetricsSummary> {
    config.validate()?;
    let p_select = selection_probability(config.epsilon, config.gamma)?;
    let first_error = std::sync::Mutex::new(None);
    let label = format!("e-BY FCR (epsilon={})", config.epsilon);
    let summary = monte_carlo(&label, config.reps, config.master_seed, |rng| {
        let fcp = match config.mode {
            SharpnessMode::ExactBernoulli => exact_fcp(config, p_select, rng),
            SharpnessMode::DiscretizedPath { h } => path_fcp(config, h, rng),
        };
        fcp.unwrap_or_else(|e| {
            first_error.lock().unwrap().get_or_insert(e);
            f64::NAN
        })
    })?;
    match first_error.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}
