//! E-value families and the e-CI constructors built on them.
//!
//! An e-CI inverts a family of e-values: `C(α) = {θ : E(θ) < 1/α}`. The
//! constructors here either produce that set in closed form or locate its
//! endpoints numerically with [`eci_from_evalue`].

mod hoeffding;
mod sequential;
mod universal;

use std::fmt;
use std::sync::Arc;

pub use hoeffding::{
    generalized_half_width, hoeffding_evalue, hoeffding_generalized_eci, hoeffding_plain_ci,
    hoeffding_pvalue, plain_half_width, HoeffdingBatchSpec,
};
pub use sequential::{
    ConfidenceSequence, ConstantLambda, EProcessState, LambdaSchedule, Side,
};
pub use universal::{split_even, ui_evalue_gaussian, GaussianUi};

use crate::error::{Error, Result};
use crate::regions::{ConfidenceRegion, EciFamily, EciKind};

/// Tolerance on `e_plus * e_minus = 1` for two-sided e-values.
pub const INVERSE_TOLERANCE: f64 = 1e-9;

/// A family `θ ↦ E(θ)` of nonnegative e-values.
#[derive(Clone)]
pub struct EValueFamily {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for EValueFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EValueFamily")
    }
}

impl EValueFamily {
    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
        }
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        (self.eval)(theta)
    }
}

/// Bracket and tolerances for locating `E(θ) = 1/α` by bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSearch {
    pub lo: f64,
    pub hi: f64,
    /// Absolute tolerance on θ.
    pub tol: f64,
    pub max_steps: usize,
    /// Number of grid points used to check unimodality and seed the minimizer.
    pub grid_points: usize,
}

impl RootSearch {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            tol: 1e-9,
            max_steps: 200,
            grid_points: 1025,
        }
    }
}

/// Inverts a quasi-convex e-value family into the e-CI `α ↦ {θ : E(θ) < 1/α}`.
///
/// The family is sampled on the bracket to check that it decreases then
/// increases; anything else is rejected as `NonUnimodal`. Endpoints are the
/// outer ends of the final bisection brackets, so reported intervals contain
/// the exact sublevel set up to `tol`. A sublevel set reaching the edge of
/// the bracket is reported as unbounded on that side.
pub fn eci_from_evalue(family: &EValueFamily, search: RootSearch) -> Result<EciFamily> {
    let RootSearch {
        lo,
        hi,
        tol,
        max_steps,
        grid_points,
    } = search;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || grid_points < 3 || !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "bad root-search bracket [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (grid_points - 1) as f64;
    let thetas: Vec<f64> = (0..grid_points)
        .map(|k| if k + 1 == grid_points { hi } else { lo + k as f64 * step })
        .collect();
    let values: Vec<f64> = thetas.iter().map(|&t| family.evaluate(t)).collect();
    if values.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::InvalidSpec(
            "e-value family must be nonnegative".into(),
        ));
    }
    let argmin = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let slack = |a: f64, b: f64| 1e-12 * a.abs().max(b.abs()).max(1e-300);
    let falls = values[..=argmin]
        .windows(2)
        .all(|w| w[1] <= w[0] + slack(w[0], w[1]));
    let rises = values[argmin..]
        .windows(2)
        .all(|w| w[1] >= w[0] - slack(w[0], w[1]));
    if !(falls && rises) {
        return Err(Error::NonUnimodal);
    }

    // Golden-section refinement of the minimizer between neighbouring nodes.
    let mut a = thetas[argmin.saturating_sub(1)];
    let mut b = thetas[(argmin + 1).min(grid_points - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        if b - a <= tol * 1e-3 {
            break;
        }
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        if family.evaluate(c) <= family.evaluate(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = 0.5 * (a + b);
    let center = if family.evaluate(refined) <= values[argmin] {
        refined
    } else {
        thetas[argmin]
    };
    let e_center = family.evaluate(center);
    let e_lo = values[0];
    let e_hi = values[grid_points - 1];

    let family = family.clone();
    Ok(EciFamily::new(EciKind::FromEvalue, move |alpha| {
        if alpha <= 0.0 {
            return ConfidenceRegion::FullSpace;
        }
        let level = 1.0 / alpha;
        if e_center >= level {
            return ConfidenceRegion::EmptySet;
        }
        let left = if e_lo < level {
            f64::NEG_INFINITY
        } else {
            // E(outer) >= level > E(inner)
            let (mut outer, mut inner) = (lo, center);
            for _ in 0..max_steps {
                if inner - outer <= tol {
                    break;
                }
                let mid = 0.5 * (outer + inner);
                if family.evaluate(mid) >= level {
                    outer = mid;
                } else {
                    inner = mid;
                }
            }
            outer
        };
        let right = if e_hi < level {
            f64::INFINITY
        } else {
            let (mut inner, mut outer) = (center, hi);
            for _ in 0..max_steps {
                if outer - inner <= tol {
                    break;
                }
                let mid = 0.5 * (outer + inner);
                if family.evaluate(mid) >= level {
                    outer = mid;
                } else {
                    inner = mid;
                }
            }
            outer
        };
        ConfidenceRegion::open_interval(left, right).unwrap_or(ConfidenceRegion::EmptySet)
    }))
}

/// Indicator e-CI for testing `θ ∈ [null_lo, null_hi]` with a single e-value:
/// the null set is excluded exactly when `e > 1/α`.
pub fn indicator_eci(e: f64, null_lo: f64, null_hi: f64) -> Result<EciFamily> {
    if !(e >= 0.0) {
        return Err(Error::InvalidSpec(format!("e-value must be nonnegative, got {e}")));
    }
    let excluded = ConfidenceRegion::null_complement(null_lo, null_hi)?;
    Ok(EciFamily::new(EciKind::FromEvalue, move |alpha| {
        if alpha > 0.0 && e > 1.0 / alpha {
            excluded
        } else {
            ConfidenceRegion::FullSpace
        }
    }))
}

/// Checks the two-sided pairing `e_plus * e_minus = 1`.
pub fn check_inverse(e_plus: f64, e_minus: f64) -> Result<()> {
    let product = e_plus * e_minus;
    if e_plus >= 0.0 && e_minus >= 0.0 && (product - 1.0).abs() <= INVERSE_TOLERANCE {
        Ok(())
    } else {
        Err(Error::NotInverse { e_plus, e_minus })
    }
}

/// Sign e-CI from a pair of one-sided e-values: `e_plus` tests `θ ≥ 0`,
/// `e_minus` tests `θ ≤ 0`.
pub fn directional_eci(e_plus: f64, e_minus: f64) -> Result<EciFamily> {
    check_inverse(e_plus, e_minus)?;
    let negative = ConfidenceRegion::open_interval(f64::NEG_INFINITY, 0.0)?;
    let positive = ConfidenceRegion::half_line_above(0.0, true)?;
    Ok(EciFamily::new(EciKind::FromEvalue, move |alpha| {
        if alpha <= 0.0 {
            return ConfidenceRegion::FullSpace;
        }
        let threshold = 2.0 / alpha;
        if e_plus > threshold {
            negative
        } else if e_minus > threshold {
            positive
        } else {
            ConfidenceRegion::FullSpace
        }
    }))
}
