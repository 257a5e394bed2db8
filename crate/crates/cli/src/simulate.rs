//! `eby simulate`: experiment configs, runners and CSV output.

use std::path::Path;

use clap::ValueEnum;
use eby_core::experiments::{
    run_ebh_reduction, run_fig2, run_sharpness, EbhReductionConfig, Fig2Config, PValueMode,
    Setting, SharpnessConfig, SharpnessMode,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{check_schema, config_hash, fmt_num, read_json, unix_time, write_manifest, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Fig2,
    Sharpness,
    Ebh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PValueArg {
    Consistent,
    Paper,
}

impl From<PValueArg> for PValueMode {
    fn from(p: PValueArg) -> Self {
        match p {
            PValueArg::Consistent => PValueMode::Consistent,
            PValueArg::Paper => PValueMode::Paper,
        }
    }
}

/// Command-line values that replace those in the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub pvalue_mode: Option<PValueMode>,
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
pub struct Fig2Sim {
    pub schema: u32,
    pub settings: Vec<Setting>,
    pub ks: Vec<usize>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pvalue_mode: PValueMode,
}

fn default_mode() -> SharpnessMode {
    SharpnessMode::ExactBernoulli
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessSim {
    pub schema: u32,
    pub k: usize,
    pub gamma: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: SharpnessMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EbhSim {
    pub schema: u32,
    pub k: usize,
    pub non_nulls: usize,
    pub signal: f64,
    pub lambda: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SimConfig {
    Fig2(Fig2Sim),
    Sharpness(SharpnessSim),
    Ebh(EbhSim),
}

fn csv_string(rows: Vec<Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl SimConfig {
    pub fn load(kind: SimKind, path: &Path) -> CliResult<Self> {
        let config = match kind {
            SimKind::Fig2 => SimConfig::Fig2(read_json(path)?),
            SimKind::Sharpness => SimConfig::Sharpness(read_json(path)?),
            SimKind::Ebh => SimConfig::Ebh(read_json(path)?),
        };
        check_schema(config.schema())?;
        Ok(config)
    }

    fn schema(&self) -> u32 {
        match self {
            SimConfig::Fig2(c) => c.schema,
            SimConfig::Sharpness(c) => c.schema,
            SimConfig::Ebh(c) => c.schema,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            SimConfig::Fig2(c) => c.seed,
            SimConfig::Sharpness(c) => c.seed,
            SimConfig::Ebh(c) => c.seed,
        }
    }

    pub fn apply(&mut self, o: Overrides) -> CliResult<()> {
        if o.pvalue_mode.is_some() && !matches!(self, SimConfig::Fig2(_)) {
            return Err(CliError::BadInput("--pvalue-mode applies to fig2 only".into()));
        }
        let (seed, reps) = match self {
            SimConfig::Fig2(c) => {
                if let Some(m) = o.pvalue_mode {
                    c.pvalue_mode = m;
                }
                (&mut c.seed, &mut c.reps)
            }
            SimConfig::Sharpness(c) => (&mut c.seed, &mut c.reps),
            SimConfig::Ebh(c) => (&mut c.seed, &mut c.reps),
        };
        if let Some(s) = o.seed {
            *seed = s;
        }
        if let Some(r) = o.reps {
            *reps = r;
        }
        Ok(())
    }

    /// Runs every cell of the config and returns the CSV text.
    pub fn run(&self) -> CliResult<String> {
        match self {
            SimConfig::Fig2(c) => {
                if c.settings.is_empty() || c.ks.is_empty() {
                    return Err(CliError::BadInput("settings and ks must be nonempty".into()));
                }
                let mut rows = vec![header(&[
                    "setting", "K", "method", "fcr_mean", "fcr_se", "width_mean", "width_se",
                    "reps", "seed", "selected_mean", "width_reps",
                ])];
                for &setting in &c.settings {
                    for &k in &c.ks {
                        let config = Fig2Config {
                            k,
                            n: c.n,
                            sigma: c.sigma,
                            delta: c.delta,
                            setting,
                            reps: c.reps,
                            master_seed: c.seed,
                            pvalue_mode: c.pvalue_mode,
                        };
                        for r in run_fig2(&config)? {
                            rows.push(vec![
                                r.setting.name().to_string(),
                                r.k.to_string(),
                                r.method,
                                fmt_num(r.fcr_mean),
                                fmt_num(r.fcr_se),
                                fmt_num(r.width_mean),
                                fmt_num(r.width_se),
                                r.reps.to_string(),
                                r.seed.to_string(),
                                fmt_num(r.selected_mean),
                                r.width_reps.to_string(),
                            ]);
                        }
                    }
                }
                csv_string(rows)
            }
            SimConfig::Sharpness(c) => {
                if c.epsilons.is_empty() {
                    return Err(CliError::BadInput("epsilons must be nonempty".into()));
                }
                let mut rows = vec![header(&[
                    "epsilon", "K", "gamma", "delta", "method", "fcr_mean", "fcr_se", "reps", "seed",
                ])];
                for &epsilon in &c.epsilons {
                    let config = SharpnessConfig {
                        k: c.k,
                        gamma: c.gamma,
                        delta: c.delta,
                        epsilon,
                        reps: c.reps,
                        master_seed: c.seed,
                        mode: c.mode,
                    };
                    let s = run_sharpness(&config)?;
                    rows.push(vec![
                        fmt_num(epsilon),
                        c.k.to_string(),
                        fmt_num(c.gamma),
                        fmt_num(c.delta),
                        "e-BY".into(),
                        fmt_num(s.mean),
                        fmt_num(s.std_err),
                        c.reps.to_string(),
                        c.seed.to_string(),
                    ]);
                }
                csv_string(rows)
            }
            SimConfig::Ebh(c) => {
                let config = EbhReductionConfig {
                    k: c.k,
                    non_nulls: c.non_nulls,
                    signal: c.signal,
                    lambda: c.lambda,
                    rho: c.rho,
                    delta: c.delta,
                    reps: c.reps,
                    master_seed: c.seed,
                };
                let r = run_ebh_reduction(&config)?;
                let mut rows = vec![header(&[
                    "K", "non_nulls", "rho", "delta", "metric", "mean", "se", "reps", "seed",
                    "mismatches", "selected_mean",
                ])];
                for s in [&r.fcr, &r.fdr] {
                    rows.push(vec![
                        c.k.to_string(),
                        c.non_nulls.to_string(),
                        fmt_num(c.rho),
                        fmt_num(c.delta),
                        s.metric_label.clone(),
                        fmt_num(s.mean),
                        fmt_num(s.std_err),
                        s.reps.to_string(),
                        c.seed.to_string(),
                        r.mismatches.to_string(),
                        fmt_num(r.selected_mean),
                    ]);
                }
                csv_string(rows)
            }
        }
    }
}

fn kind_name(kind: SimKind) -> &'static str {
    match kind {
        SimKind::Fig2 => "fig2",
        SimKind::Sharpness => "sharpness",
        SimKind::Ebh => "ebh",
    }
}

/// Loads, runs and writes `out` plus `out.manifest.json`.
pub fn simulate(kind: SimKind, config_path: &Path, out: &Path, overrides: Overrides) -> CliResult<()> {
    let started = unix_time();
    let mut config = SimConfig::load(kind, config_path)?;
    config.apply(overrides)?;
    let csv = config.run()?;
    std::fs::write(out, csv)?;
    let manifest = RunManifest {
        command: format!("simulate {}", kind_name(kind)),
        config_hash: config_hash(&config)?,
        master_seed: config.seed(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: unix_time(),
    };
    write_manifest(out, &manifest)
}
