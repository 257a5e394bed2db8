//! Selection rules and the level corrections applied to selected parameters.
//!
//! Indices are 0-based throughout the library.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalues::check_inverse;
use crate::regions::{ConfidenceRegion, EciFamily};

/// Upper clamp on weighted levels.
pub const MAX_LEVEL: f64 = 1.0 - 1e-12;

/// `ℓ_K = Σ_{k=1}^{K} 1/k`, summed smallest term first.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).rev().map(|j| 1.0 / j as f64).sum()
}

/// `δ·count/(K·ℓ_K)`: the arbitrary-dependence BY level for a selection of
/// size `count`.
pub fn by_dependent_alpha(delta: f64, count: usize, k: usize) -> f64 {
    e_by_alpha(delta, count, k) / harmonic(k)
}

/// `δ·count/K`.
pub fn e_by_alpha(delta: f64, count: usize, k: usize) -> f64 {
    delta * count as f64 / k as f64
}

/// The selected set `S` and, when the rule that produced it knows it, the
/// per-index `R_i^min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub k: usize,
    /// Sorted, distinct, each `< k`.
    pub selected: Vec<usize>,
    pub r_min: Option<BTreeMap<usize, usize>>,
    pub rule_label: String,
}

impl SelectionOutcome {
    pub fn new(k: usize, selected: impl IntoIterator<Item = usize>, rule_label: impl Into<String>) -> Result<Self> {
        let mut selected: Vec<usize> = selected.into_iter().collect();
        selected.sort_unstable();
        selected.dedup();
        if let Some(&bad) = selected.iter().find(|&&i| i >= k) {
            return Err(Error::InvalidSpec(format!(
                "selected index {bad} out of range for K = {k}"
            )));
        }
        Ok(Self {
            k,
            selected,
            r_min: None,
            rule_label: rule_label.into(),
        })
    }

    /// Attaches `R_i^min`; every selected index needs a value in `1..=|S|`.
    pub fn with_r_min(mut self, r_min: BTreeMap<usize, usize>) -> Result<Self> {
        let size = self.selected.len();
        for &i in &self.selected {
            match r_min.get(&i) {
                Some(&r) if (1..=size).contains(&r) => {}
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "r_min for index {i} must lie in 1..={size}, got {other:?}"
                    )))
                }
            }
        }
        self.r_min = Some(r_min);
        Ok(self)
    }

    /// Sets `R_i^min = |S|` for every selected index.
    pub fn with_stable_r_min(self) -> Self {
        let size = self.selected.len();
        let r_min = self.selected.iter().map(|&i| (i, size)).collect();
        Self {
            r_min: Some(r_min),
            ..self
        }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub index: usize,
    pub alpha: f64,
    pub region: ConfidenceRegion,
}

/// One reported region per selected index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcedureReport {
    pub entries: Vec<ReportEntry>,
    pub procedure_label: String,
    pub delta: f64,
    pub k: usize,
}

/// Per-parameter weights for weighted e-BY, summing to at most `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidSpec(format!("weight {bad} must be finite and nonnegative")));
        }
        let sum: f64 = w.iter().sum();
        let k = w.len();
        if sum > k as f64 * (1.0 + 1e-12) {
            return Err(Error::WeightSumExceeded { sum, k });
        }
        Ok(Self(w))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(delta))
    }
}

fn check_k(families: &[EciFamily], selection: &SelectionOutcome) -> Result<usize> {
    if families.len() != selection.k {
        return Err(Error::InvalidSpec(format!(
            "{} families supplied for K = {}",
            families.len(),
            selection.k
        )));
    }
    Ok(selection.k)
}

fn require_ecis(families: &[EciFamily], selection: &SelectionOutcome) -> Result<()> {
    match selection.selected.iter().find(|&&i| !families[i].kind().is_eci()) {
        Some(&i) => Err(Error::NotAnEci(i)),
        None => Ok(()),
    }
}

fn build_report<F>(
    families: &[EciFamily],
    selection: &SelectionOutcome,
    delta: f64,
    label: String,
    alpha_of: F,
) -> Result<ProcedureReport>
where
    F: Fn(usize) -> f64,
{
    let entries = selection
        .selected
        .iter()
        .map(|&index| {
            let alpha = alpha_of(index);
            Ok(ReportEntry {
                index,
                alpha,
                region: families[index].evaluate(alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProcedureReport {
        entries,
        procedure_label: label,
        delta,
        k: selection.k,
    })
}

/// e-BY: every selected e-CI is reported at `δ|S|/K`.
pub fn e_by(ecis: &[EciFamily], selection: &SelectionOutcome, delta: f64) -> Result<ProcedureReport> {
    check_delta(delta)?;
    let k = check_k(ecis, selection)?;
    require_ecis(ecis, selection)?;
    let alpha = e_by_alpha(delta, selection.len(), k);
    build_report(ecis, selection, delta, "e-BY".into(), |_| alpha)
}

/// Weighted e-BY: index `i` is reported at `min(1-ε, w_i·δ|S|/K)`.
pub fn weighted_e_by(
    ecis: &[EciFamily],
    selection: &SelectionOutcome,
    delta: f64,
    weights: &WeightVector,
) -> Result<ProcedureReport> {
    check_delta(delta)?;
    let k = check_k(ecis, selection)?;
    if weights.0.len() != k {
        return Err(Error::InvalidSpec(format!(
            "{} weights supplied for K = {k}",
            weights.0.len()
        )));
    }
    require_ecis(ecis, selection)?;
    let base = e_by_alpha(delta, selection.len(), k);
    build_report(ecis, selection, delta, "weighted e-BY".into(), |i| {
        (weights.0[i] * base).min(MAX_LEVEL)
    })
}

/// BY under independence or PRDS: index `i` is reported at `δ·R_i^min/K`.
///
/// Without an `R_i^min` oracle on the selection, `R_i^min = 1` is used
/// (Bonferroni) and the report label says so.
pub fn by_independent(
    cis: &[EciFamily],
    selection: &SelectionOutcome,
    delta: f64,
) -> Result<ProcedureReport> {
    check_delta(delta)?;
    let k = check_k(cis, selection)?;
    match &selection.r_min {
        Some(r_min) => build_report(cis, selection, delta, "BY (independent)".into(), |i| {
            e_by_alpha(delta, r_min[&i], k)
        }),
        None => build_report(
            cis,
            selection,
            delta,
            "BY (independent; warning: no r_min for this rule, using 1)".into(),
            |_| e_by_alpha(delta, 1, k),
        ),
    }
}

/// BY under arbitrary dependence: every selected CI at `δ|S|/(K·ℓ_K)`.
pub fn by_dependent(
    cis: &[EciFamily],
    selection: &SelectionOutcome,
    delta: f64,
) -> Result<ProcedureReport> {
    check_delta(delta)?;
    let k = check_k(cis, selection)?;
    let alpha = by_dependent_alpha(delta, selection.len(), k);
    build_report(cis, selection, delta, "BY (dependent)".into(), |_| alpha)
}

/// `S = {i : p_i < δ}`. `R_i^min` is left unknown.
pub fn p_threshold_select(pvalues: &[f64], delta: f64) -> SelectionOutcome {
    let selected = pvalues
        .iter()
        .enumerate()
        .filter(|(_, &p)| p < delta)
        .map(|(i, _)| i);
    SelectionOutcome::new(pvalues.len(), selected, format!("p < {delta}"))
        .expect("indices come from enumerate")
}

/// Order of indices by `key`, ties kept in index order.
fn stable_order(values: &[f64], descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let c = values[a].total_cmp(&values[b]);
        if descending {
            c.reverse()
        } else {
            c
        }
    });
    order
}

/// Benjamini–Hochberg: the `k_BH` smallest p-values with
/// `k_BH = max{k : p_(k) ≤ δk/K} ∪ {0}`. Equal values are ordered by index; they are
/// always selected or rejected together since the threshold is monotone in k.
pub fn bh_select(pvalues: &[f64], delta: f64) -> SelectionOutcome {
    let k = pvalues.len();
    let order = stable_order(pvalues, false);
    let cut = (1..=k)
        .rev()
        .find(|&j| pvalues[order[j - 1]] <= delta * j as f64 / k as f64)
        .unwrap_or(0);
    SelectionOutcome::new(k, order[..cut].iter().copied(), "BH")
        .expect("indices come from enumerate")
        .with_stable_r_min()
}

/// `k_EBH = max{k : E_(k) ≥ K/(δk)} ∪ {0}` with `E_(1) ≥ E_(2) ≥ …`.
pub fn e_bh_count(evalues: &[f64], delta: f64) -> usize {
    let k = evalues.len();
    let order = stable_order(evalues, true);
    (1..=k)
        .rev()
        .find(|&j| evalues[order[j - 1]] >= k as f64 / (delta * j as f64))
        .unwrap_or(0)
}

/// e-BH: the `k_EBH` largest e-values. Equal values are ordered by index; they are
/// always selected or rejected together since the threshold is monotone in k.
pub fn e_bh_select(evalues: &[f64], delta: f64) -> SelectionOutcome {
    let order = stable_order(evalues, true);
    let cut = e_bh_count(evalues, delta);
    SelectionOutcome::new(evalues.len(), order[..cut].iter().copied(), "e-BH")
        .expect("indices come from enumerate")
        .with_stable_r_min()
}

/// Declared sign of a rejected parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn sign(self) -> i8 {
        match self {
            Direction::Positive => 1,
            Direction::Negative => -1,
        }
    }
}

/// Directional e-BH on inverse pairs `(E_i^+, E_i^-)`: e-BH on
/// `max(E_i^+, E_i^-)/2`, then `D_i = -1` iff `E_i^+ ≥ K/(δ·k_EBH)`.
pub fn directional_e_bh(
    e_plus: &[f64],
    e_minus: &[f64],
    delta: f64,
) -> Result<(SelectionOutcome, BTreeMap<usize, Direction>)> {
    if e_plus.len() != e_minus.len() {
        return Err(Error::InvalidSpec("e_plus and e_minus lengths differ".into()));
    }
    for (&p, &m) in e_plus.iter().zip(e_minus) {
        check_inverse(p, m)?;
    }
    let combined: Vec<f64> = e_plus
        .iter()
        .zip(e_minus)
        .map(|(&p, &m)| p.max(m) / 2.0)
        .collect();
    let selection = e_bh_select(&combined, delta);
    let mut directions = BTreeMap::new();
    if !selection.is_empty() {
        let threshold = e_plus.len() as f64 / (delta * selection.len() as f64);
        for &i in &selection.selected {
            let d = if e_plus[i] >= threshold {
                Direction::Negative
            } else {
                Direction::Positive
            };
            directions.insert(i, d);
        }
    }
    Ok((selection, directions))
}
