//! `eby report`: apply a procedure to user-supplied families and a selection.

use std::collections::BTreeMap;

use clap::ValueEnum;
use eby_core::evalues::{
    eci_from_evalue, hoeffding_generalized_eci, hoeffding_plain_ci, indicator_eci,
    EProcessState, EValueFamily, GaussianUi, HoeffdingBatchSpec, RootSearch,
};
use eby_core::procedures::{
    bh_select, by_dependent, by_independent, e_bh_select, e_by, p_threshold_select,
    weighted_e_by, ProcedureReport, SelectionOutcome, WeightVector,
};
use eby_core::EciFamily;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{check_schema, fmt_num};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Procedure {
    #[serde(rename = "eby")]
    #[value(name = "eby")]
    Eby,
    #[serde(rename = "weighted-eby")]
    #[value(name = "weighted-eby")]
    WeightedEby,
    #[serde(rename = "by-ind")]
    #[value(name = "by-ind")]
    ByInd,
    #[serde(rename = "by-dep")]
    #[value(name = "by-dep")]
    ByDep,
}

/// One parameter's interval family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Hoeffding e-CI tuned at `alpha_prime`.
    Hoeffding {
        sample_mean: f64,
        n: u64,
        range: [f64; 2],
        alpha_prime: f64,
    },
    /// Plain Hoeffding CI (not an e-CI).
    HoeffdingPlain {
        sample_mean: f64,
        n: u64,
        range: [f64; 2],
    },
    GaussianUi {
        d0: Vec<f64>,
        d1: Vec<f64>,
    },
    Indicator {
        e: f64,
        null: [f64; 2],
    },
    /// E(θ) tabulated on an increasing grid, interpolated linearly and
    /// inverted numerically. Sublevel sets reaching a grid edge are
    /// reported as unbounded on that side.
    EvalueGrid {
        theta: Vec<f64>,
        e: Vec<f64>,
    },
    /// Constant-bet Hoeffding confidence sequence at its last observation.
    ConfidenceSequence {
        range: [f64; 2],
        observations: Vec<f64>,
        lambda: f64,
    },
}

impl FamilySpec {
    pub fn build(&self) -> CliResult<EciFamily> {
        Ok(match self {
            FamilySpec::Hoeffding {
                sample_mean,
                n,
                range,
                alpha_prime,
            } => {
                let spec = HoeffdingBatchSpec::new(*sample_mean, *n, range[0], range[1])?;
                hoeffding_generalized_eci(&spec, *alpha_prime)?
            }
            FamilySpec::HoeffdingPlain {
                sample_mean,
                n,
                range,
            } => hoeffding_plain_ci(&HoeffdingBatchSpec::new(*sample_mean, *n, range[0], range[1])?),
            FamilySpec::GaussianUi { d0, d1 } => GaussianUi::new(d0, d1)?.eci(),
            FamilySpec::Indicator { e, null } => indicator_eci(*e, null[0], null[1])?,
            FamilySpec::EvalueGrid { theta, e } => {
                let family = interpolated(theta.clone(), e.clone())?;
                let lo = theta[0];
                let hi = theta[theta.len() - 1];
                eci_from_evalue(&family, RootSearch::new(lo, hi))?
            }
            FamilySpec::ConfidenceSequence {
                range,
                observations,
                lambda,
            } => {
                let mut state = EProcessState::new(range[0], range[1])?;
                for &x in observations {
                    state = state.update(x, *lambda)?;
                }
                state.as_eci()
            }
        })
    }
}

fn interpolated(theta: Vec<f64>, e: Vec<f64>) -> CliResult<EValueFamily> {
    if theta.len() < 2 || theta.len() != e.len() {
        return Err(CliError::BadInput(
            "evalue_grid needs matching theta and e arrays of length >= 2".into(),
        ));
    }
    if theta.windows(2).any(|w| !(w[0] < w[1])) || theta.iter().any(|t| !t.is_finite()) {
        return Err(CliError::BadInput("evalue_grid theta must increase strictly".into()));
    }
    if e.iter().any(|v| !(*v >= 0.0)) {
        return Err(CliError::BadInput("evalue_grid e must be nonnegative".into()));
    }
    Ok(EValueFamily::new(move |t| {
        let k = theta.partition_point(|&x| x <= t);
        if k == 0 {
            return e[0];
        }
        if k == theta.len() {
            return e[k - 1];
        }
        let w = (t - theta[k - 1]) / (theta[k] - theta[k - 1]);
        e[k - 1] + w * (e[k] - e[k - 1])
    }))
}

/// Indices in input and output are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionSpec {
    Indices {
        indices: Vec<usize>,
        /// `R_i^min` for each listed index, in the same order.
        #[serde(default)]
        r_min: Option<Vec<usize>>,
    },
    PThreshold {
        pvalues: Vec<f64>,
    },
    Bh {
        pvalues: Vec<f64>,
    },
    EBh {
        evalues: Vec<f64>,
    },
}

impl SelectionSpec {
    pub fn build(&self, k: usize, delta: f64) -> CliResult<SelectionOutcome> {
        let check_len = |len: usize| {
            if len == k {
                Ok(())
            } else {
                Err(CliError::BadInput(format!(
                    "selection has {len} values but there are {k} families"
                )))
            }
        };
        Ok(match self {
            SelectionSpec::Indices { indices, r_min } => {
                if indices.iter().any(|&i| i == 0 || i > k) {
                    return Err(CliError::BadInput(format!("indices must lie in 1..={k}")));
                }
                let zero_based: Vec<usize> = indices.iter().map(|i| i - 1).collect();
                let outcome = SelectionOutcome::new(k, zero_based.iter().copied(), "indices")?;
                match r_min {
                    None => outcome,
                    Some(r) if r.len() == indices.len() => {
                        let map: BTreeMap<usize, usize> =
                            zero_based.iter().copied().zip(r.iter().copied()).collect();
                        outcome.with_r_min(map)?
                    }
                    Some(_) => {
                        return Err(CliError::BadInput(
                            "r_min must have one entry per index".into(),
                        ))
                    }
                }
            }
            SelectionSpec::PThreshold { pvalues } => {
                check_len(pvalues.len())?;
                p_threshold_select(pvalues, delta)
            }
            SelectionSpec::Bh { pvalues } => {
                check_len(pvalues.len())?;
                bh_select(pvalues, delta)
            }
            SelectionSpec::EBh { evalues } => {
                check_len(evalues.len())?;
                e_bh_select(evalues, delta)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportInput {
    pub schema: u32,
    #[serde(default)]
    pub procedure: Option<Procedure>,
    #[serde(default)]
    pub delta: Option<f64>,
    pub families: Vec<FamilySpec>,
    pub selection: SelectionSpec,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

/// Runs the procedure; command-line values override those in the input.
pub fn run_report(
    input: &ReportInput,
    procedure: Option<Procedure>,
    delta: Option<f64>,
) -> CliResult<ProcedureReport> {
    check_schema(input.schema)?;
    let procedure = procedure
        .or(input.procedure)
        .ok_or_else(|| CliError::BadInput("no procedure given".into()))?;
    let delta = delta
        .or(input.delta)
        .ok_or_else(|| CliError::BadInput("no delta given".into()))?;
    let families = input
        .families
        .iter()
        .map(FamilySpec::build)
        .collect::<CliResult<Vec<_>>>()?;
    let selection = input.selection.build(families.len(), delta)?;
    let report = match procedure {
        Procedure::Eby => e_by(&families, &selection, delta)?,
        Procedure::WeightedEby => {
            let w = input
                .weights
                .clone()
                .ok_or_else(|| CliError::BadInput("weighted-eby needs weights".into()))?;
            weighted_e_by(&families, &selection, delta, &WeightVector::new(w)?)?
        }
        Procedure::ByInd => by_independent(&families, &selection, delta)?,
        Procedure::ByDep => by_dependent(&families, &selection, delta)?,
    };
    Ok(report)
}

/// CSV with header `index,alpha,region`; the region column holds JSON.
pub fn report_csv(report: &ProcedureReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "alpha", "region"])?;
    for e in &report.entries {
        let region = serde_json::to_string(&e.region).map_err(|e| CliError::Internal(e.to_string()))?;
        w.write_record([(e.index + 1).to_string(), fmt_num(e.alpha), region])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(procedure: &str, family_type: &str) -> ReportInput {
        let families: Vec<String> = (0..10)
            .map(|i| {
                let extra = if family_type == "hoeffding" { r#","alpha_prime":0.05"# } else { "" };
                format!(
                    r#"{{"type":"{family_type}","sample_mean":{},"n":100,"range":[-1,1]{extra}}}"#,
                    0.05 * i as f64
                )
            })
            .collect();
        let text = format!(
            r#"{{"schema":1,"procedure":"{procedure}","delta":0.1,"families":[{}],"selection":{{"rule":"indices","indices":[1,2,3,4,5]}}}}"#,
            families.join(",")
        );
        serde_json::from_str(&text).unwrap()
    }

    #[test]
    fn eby_levels() {
        let r = run_report(&input("eby", "hoeffding"), None, None).unwrap();
        assert_eq!(r.entries.len(), 5);
        assert!(r.entries.iter().all(|e| e.alpha == 0.05));
        let csv = report_csv(&r).unwrap();
        assert!(csv.starts_with("index,alpha,region\n1,5.0000000000000003e-2,"));
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn by_dep_levels() {
        let r = run_report(&input("by-dep", "hoeffding"), None, None).unwrap();
        let l10 = 2.928968254;
        assert!(r.entries.iter().all(|e| (e.alpha - 0.05 / l10).abs() < 1e-9));
    }

    #[test]
    fn plain_ci_under_eby_is_a_contract_violation() {
        let err = run_report(&input("eby", "hoeffding_plain"), None, None).unwrap_err();
        assert!(matches!(err, CliError::Contract(_)));
        assert!(run_report(&input("by-ind", "hoeffding_plain"), None, None).is_ok());
    }

    #[test]
    fn strict_parsing() {
        let bad = r#"{"schema":1,"families":[],"selection":{"rule":"bh","pvalues":[]},"typo":1}"#;
        assert!(serde_json::from_str::<ReportInput>(bad).is_err());
        let bad = r#"{"schema":1,"families":[{"type":"indicator","e":1,"null":[0,0],"x":2}],"selection":{"rule":"bh","pvalues":[0.1]}}"#;
        assert!(serde_json::from_str::<ReportInput>(bad).is_err());
        let mut wrong = input("eby", "hoeffding");
        wrong.schema = 2;
        assert!(matches!(run_report(&wrong, None, None), Err(CliError::BadInput(_))));
    }

    #[test]
    fn grid_family_inverts() {
        let spec = FamilySpec::EvalueGrid {
            theta: vec![-2.0, 0.0, 2.0],
            e: vec![40.0, 0.0, 40.0],
        };
        let r = spec.build().unwrap().evaluate(0.05).unwrap();
        assert!((r.lower().unwrap() + 1.0).abs() < 1e-8);
        assert!((r.upper().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn selection_rules() {
        let sel = SelectionSpec::EBh {
            evalues: vec![40.0, 10.0, 2.0, 1.0],
        };
        assert_eq!(sel.build(4, 0.1).unwrap().selected, vec![0]);
        let bad = SelectionSpec::Indices {
            indices: vec![0],
            r_min: None,
        };
        assert!(bad.build(4, 0.1).is_err());
        let short = SelectionSpec::Bh { pvalues: vec![0.1] };
        assert!(short.build(4, 0.1).is_err());
    }
}
