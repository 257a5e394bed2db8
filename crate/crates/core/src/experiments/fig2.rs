//! Width and false coverage of e-BY against BY on bounded data with zero
//! means.
//!
//! `X_i^j = Y_i^j W_i^j / σ` with `W` standard normal truncated to `[0, σ]`
//! and `Y` a uniform sign. In the dependent setting the signs of the second
//! half of the rows are the negated signs of the first half.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalues::{hoeffding_generalized_eci, hoeffding_plain_ci, hoeffding_pvalue, HoeffdingBatchSpec};
use crate::metrics::{fcp, replicate, MetricsSummary};
use crate::procedures::{by_dependent, by_independent, e_by, p_threshold_select, ProcedureReport};
use crate::regions::EciFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Independent,
    Dependent,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::Independent => "independent",
            Setting::Dependent => "dependent",
        }
    }
}

/// Which p-value drives the `p < δ` selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMode {
    /// `min(1, 2·exp(-n·θ̂²/2))`, matching the Hoeffding CI on `[-1, 1]`.
    #[default]
    Consistent,
    /// `min(1, 2·exp(-θ̂²/(2n)))`.
    Paper,
}

fn default_n() -> usize {
    1000
}
fn default_sigma() -> f64 {
    100.0
}
fn default_delta() -> f64 {
    0.1
}
fn default_reps() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Config {
    pub k: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub setting: Setting,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub pvalue_mode: PValueMode,
}

impl Fig2Config {
    pub fn new(k: usize, setting: Setting) -> Self {
        Self {
            k,
            n: default_n(),
            sigma: default_sigma(),
            delta: default_delta(),
            setting,
            reps: default_reps(),
            master_seed: 0,
            pvalue_mode: PValueMode::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::InvalidSpec("K and n must be at least 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidSpec(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidLevel(self.delta));
        }
        if self.reps < 2 {
            return Err(Error::TooFewReplications(self.reps));
        }
        Ok(())
    }
}

/// Standard normal truncated to `[0, sigma]`.
fn truncated_half_normal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma >= 1.0 {
        loop {
            let z: f64 = rng.sample::<f64, _>(StandardNormal).abs();
            if z <= sigma {
                return z;
            }
        }
    }
    loop {
        let u = sigma * rng.random::<f64>();
        if rng.random::<f64>() < (-0.5 * u * u).exp() {
            return u;
        }
    }
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Draws every `X_i^j`, column by column, passing `(i, x)` to `sink`.
fn generate(config: &Fig2Config, rng: &mut ChaCha8Rng, mut sink: impl FnMut(usize, f64)) {
    let half = config.k.div_ceil(2);
    let mut first_half = vec![0.0; half];
    for _ in 0..config.n {
        if config.setting == Setting::Dependent {
            for y in first_half.iter_mut() {
                *y = sign(rng);
            }
        }
        for i in 0..config.k {
            let y = match config.setting {
                Setting::Independent => sign(rng),
                Setting::Dependent if i < half => first_half[i],
                Setting::Dependent => -first_half[i - half],
            };
            let w = truncated_half_normal(rng, config.sigma);
            sink(i, y * w / config.sigma);
        }
    }
}

/// The `K × n` data matrix, one row per parameter.
pub fn gen_fig2_data(config: &Fig2Config, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut rows = vec![Vec::with_capacity(config.n); config.k];
    generate(config, rng, |i, x| rows[i].push(x));
    rows
}

/// Row means of the matrix [`gen_fig2_data`] would draw from the same
/// generator state.
pub fn fig2_sample_means(config: &Fig2Config, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut sums = vec![0.0; config.k];
    generate(config, rng, |i, x| sums[i] += x);
    sums.iter().map(|s| s / config.n as f64).collect()
}

fn pvalue(mode: PValueMode, spec: &HoeffdingBatchSpec) -> f64 {
    match mode {
        PValueMode::Consistent => hoeffding_pvalue(spec, 0.0),
        PValueMode::Paper => {
            let m = spec.sample_mean;
            (2.0 * (-m * m / (2.0 * spec.n as f64)).exp()).min(1.0)
        }
    }
}

struct RepOutcome {
    selected: usize,
    fcp: [f64; 2],
    width: [Option<f64>; 2],
}

fn mean_width(report: &ProcedureReport) -> Option<f64> {
    if report.entries.is_empty() {
        return None;
    }
    let total: f64 = report.entries.iter().map(|e| e.region.width()).sum();
    Some(total / report.entries.len() as f64)
}

fn one_rep(config: &Fig2Config, rng: &mut ChaCha8Rng) -> Result<RepOutcome> {
    let means = fig2_sample_means(config, rng);
    let specs = means
        .iter()
        .map(|&m| HoeffdingBatchSpec::new(m.clamp(-1.0, 1.0), config.n as u64, -1.0, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let pvalues: Vec<f64> = specs.iter().map(|s| pvalue(config.pvalue_mode, s)).collect();
    let selection = p_threshold_select(&pvalues, config.delta);
    let theta = vec![0.0; config.k];
    if selection.is_empty() {
        return Ok(RepOutcome {
            selected: 0,
            fcp: [0.0; 2],
            width: [None; 2],
        });
    }
    let ecis = specs
        .iter()
        .map(|s| hoeffding_generalized_eci(s, config.delta / 2.0))
        .collect::<Result<Vec<EciFamily>>>()?;
    let plain: Vec<EciFamily> = specs.iter().map(hoeffding_plain_ci).collect();
    let eby = e_by(&ecis, &selection, config.delta)?;
    let by = match config.setting {
        // The harness treats `p < δ` as stable: R_i^min = |S|.
        Setting::Independent => by_independent(&plain, &selection.clone().with_stable_r_min(), config.delta)?,
        Setting::Dependent => by_dependent(&plain, &selection, config.delta)?,
    };
    Ok(RepOutcome {
        selected: selection.len(),
        fcp: [fcp(&eby, &theta), fcp(&by, &theta)],
        width: [mean_width(&eby), mean_width(&by)],
    })
}

/// One output row per method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub setting: Setting,
    pub k: usize,
    pub method: String,
    pub fcr_mean: f64,
    pub fcr_se: f64,
    /// Average over replications with a nonempty selection; NaN if there
    /// were none.
    pub width_mean: f64,
    /// NaN with fewer than two nonempty replications.
    pub width_se: f64,
    pub reps: usize,
    pub seed: u64,
    pub selected_mean: f64,
    pub width_reps: usize,
}

pub const METHODS: [&str; 2] = ["e-BY", "BY"];

/// Runs the simulation and returns `[e-BY row, BY row]`.
pub fn run_fig2(config: &Fig2Config) -> Result<Vec<Fig2Row>> {
    config.validate()?;
    let outcomes = replicate(config.reps, config.master_seed, |rng| one_rep(config, rng))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let selected_mean =
        outcomes.iter().map(|o| o.selected as f64).sum::<f64>() / outcomes.len() as f64;
    METHODS
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let fcps: Vec<f64> = outcomes.iter().map(|o| o.fcp[m]).collect();
            let fcr = MetricsSummary::from_samples(method, &fcps)?;
            let widths: Vec<f64> = outcomes.iter().filter_map(|o| o.width[m]).collect();
            let (width_mean, width_se) = match widths.len() {
                0 => (f64::NAN, f64::NAN),
                1 => (widths[0], f64::NAN),
                _ => {
                    let s = MetricsSummary::from_samples(method, &widths)?;
                    (s.mean, s.std_err)
                }
            };
            Ok(Fig2Row {
                setting: config.setting,
                k: config.k,
                method: method.to_string(),
                fcr_mean: fcr.mean,
                fcr_se: fcr.std_err,
                width_mean,
                width_se,
                reps: config.reps,
                seed: config.master_seed,
                selected_mean,
                width_reps: widths.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::replication_rng;

    fn small(setting: Setting) -> Fig2Config {
        Fig2Config {
            n: 50,
            reps: 4,
            ..Fig2Config::new(6, setting)
        }
    }

    #[test]
    fn data_is_bounded_and_mirrored() {
        let c = Fig2Config {
            k: 4,
            ..small(Setting::Dependent)
        };
        let rows = gen_fig2_data(&c, &mut replication_rng(1, 0));
        assert_eq!(rows.len(), 4);
        for j in 0..c.n {
            for row in &rows {
                assert!(row[j].abs() <= 1.0);
            }
            if rows[0][j] != 0.0 && rows[2][j] != 0.0 {
                assert_eq!(rows[2][j].signum(), -rows[0][j].signum());
            }
            if rows[1][j] != 0.0 && rows[3][j] != 0.0 {
                assert_eq!(rows[3][j].signum(), -rows[1][j].signum());
            }
        }
    }

    #[test]
    fn odd_k_mirrors_the_first_rows() {
        let c = Fig2Config {
            k: 5,
            sigma: 0.5,
            ..small(Setting::Dependent)
        };
        let rows = gen_fig2_data(&c, &mut replication_rng(2, 0));
        for j in 0..c.n {
            assert_eq!(rows[3][j].signum(), -rows[0][j].signum());
            assert_eq!(rows[4][j].signum(), -rows[1][j].signum());
        }
    }

    #[test]
    fn means_agree_with_matrix() {
        for setting in [Setting::Independent, Setting::Dependent] {
            let c = small(setting);
            let rows = gen_fig2_data(&c, &mut replication_rng(9, 3));
            let means = fig2_sample_means(&c, &mut replication_rng(9, 3));
            for (row, m) in rows.iter().zip(&means) {
                let direct = row.iter().sum::<f64>() / c.n as f64;
                assert_eq!(direct.to_bits(), m.to_bits());
            }
        }
    }

    #[test]
    fn small_sigma_truncation() {
        let mut rng = replication_rng(5, 0);
        for _ in 0..1000 {
            let w = truncated_half_normal(&mut rng, 0.3);
            assert!((0.0..=0.3).contains(&w));
        }
    }

    #[test]
    fn alternate_pvalue_is_near_two() {
        let spec = HoeffdingBatchSpec::new(0.3, 100, -1.0, 1.0).unwrap();
        assert_eq!(pvalue(PValueMode::Paper, &spec), 1.0);
        assert!((pvalue(PValueMode::Consistent, &spec) - 0.02222).abs() < 1e-5);
    }

    #[test]
    fn run_produces_two_rows() {
        let rows = run_fig2(&small(Setting::Independent)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].method, "e-BY");
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.fcr_mean)));
        let mut bad = small(Setting::Dependent);
        bad.reps = 1;
        assert!(run_fig2(&bad).is_err());
    }
}
