//! Duality between confidence intervals, p-values and e-values.
//!
//! A calibrator `f` is a nonincreasing map on `[0,1]` with `∫f ≤ 1`; `f(P)`
//! is then an e-value for every p-value `P`. Its dual
//! `f⁻¹(x) = sup{p : f(p) ≥ x}` turns any CI family into an e-CI family via
//! `C^cal(α) = C(f⁻¹(1/α))`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::procedures::{by_dependent_alpha, harmonic};
use crate::quadrature::integrate;
use crate::regions::{ConfidenceRegion, EciFamily, EciKind};

/// Relative distance within which `K·α/δ` is snapped to the nearest integer
/// before taking a floor, so that levels such as `δj/K` map to step `j`.
const SNAP: f64 = 1e-9;

#[derive(Clone)]
enum Shape {
    Power {
        kappa: f64,
    },
    By {
        delta: f64,
        k: usize,
        ell: f64,
    },
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        tol: f64,
    },
}

/// A p-to-e calibrator together with its dual.
#[derive(Clone)]
pub struct Calibrator {
    shape: Shape,
    label: String,
}

impl fmt::Debug for Calibrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Calibrator").field("label", &self.label).finish()
    }
}

/// `f(p) = κ·p^{κ-1}`.
pub fn power_calibrator(kappa: f64) -> Result<Calibrator> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidKappa(kappa));
    }
    Ok(Calibrator {
        shape: Shape::Power { kappa },
        label: format!("power(kappa={kappa})"),
    })
}

/// The step calibrator `f(x) = K/(δ·⌈K·ℓ_K·x/δ⌉)` whose dual reproduces the
/// arbitrary-dependence BY levels inside e-BY.
///
/// `f(0) = K/δ`. For `x > δ/ℓ_K` the ceiling exceeds `K` and `f` is zero;
/// continuing the ceiling formula there would push the integral above 1.
pub fn by_calibrator(delta: f64, k: usize) -> Result<Calibrator> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidLevel(delta));
    }
    if k == 0 {
        return Err(Error::InvalidSpec("by_calibrator needs K >= 1".into()));
    }
    Ok(Calibrator {
        shape: Shape::By {
            delta,
            k,
            ell: harmonic(k),
        },
        label: format!("by(delta={delta}, K={k})"),
    })
}

impl Calibrator {
    /// Any nonincreasing `f` on `[0,1]`; the dual is found by bisection to
    /// absolute tolerance `1e-9`. Validity (`∫f ≤ 1`) is the caller's claim;
    /// check it with [`Calibrator::integral`].
    pub fn custom<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            shape: Shape::Custom {
                f: Arc::new(f),
                tol: 1e-9,
            },
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn f(&self, p: f64) -> f64 {
        match &self.shape {
            Shape::Power { kappa } => kappa * p.powf(kappa - 1.0),
            Shape::By { delta, k, ell } => {
                if p <= 0.0 {
                    return *k as f64 / delta;
                }
                let steps = (*k as f64 * ell * p / delta).ceil();
                if steps > *k as f64 {
                    0.0
                } else {
                    *k as f64 / (delta * steps)
                }
            }
            Shape::Custom { f, .. } => f(p),
        }
    }

    /// `sup{p ∈ [0,1] : f(p) ≥ x}`, or 0 when no such `p` exists.
    pub fn dual(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match &self.shape {
            Shape::Power { kappa } => {
                if x.is_infinite() {
                    0.0
                } else {
                    (x / kappa).powf(1.0 / (kappa - 1.0)).clamp(0.0, 1.0)
                }
            }
            Shape::By { delta, k, .. } => {
                let steps = snapped_floor(*k as f64 / (delta * x)).min(*k as f64);
                by_dependent_alpha(*delta, steps as usize, *k)
            }
            Shape::Custom { f, tol } => {
                if f(1.0) >= x {
                    return 1.0;
                }
                if !(f(0.0) >= x) {
                    return 0.0;
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                while hi - lo > *tol {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) >= x {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    /// `∫₀¹ f` by tanh-sinh quadrature, split at the jumps of step
    /// calibrators.
    pub fn integral(&self) -> f64 {
        match &self.shape {
            Shape::By { delta, k, ell } => {
                let width = delta / (*k as f64 * ell);
                (0..*k)
                    .map(|j| {
                        let a = j as f64 * width;
                        let b = (j + 1) as f64 * width;
                        let mid = 0.5 * (a + b);
                        let value = self.f(mid);
                        integrate(|_| value, a, b, 1e-14)
                    })
                    .sum()
            }
            _ => integrate(|p| self.f(p), 0.0, 1.0, 1e-13),
        }
    }
}

fn snapped_floor(q: f64) -> f64 {
    if !q.is_finite() {
        return q;
    }
    let r = q.round();
    if (q - r).abs() <= SNAP * q.abs().max(1.0) {
        r
    } else {
        q.floor()
    }
}

/// `α ↦ C(f⁻¹(1/α))`: an e-CI family for any valid calibrator.
pub fn calibrate_ci(ci: &EciFamily, cal: &Calibrator) -> EciFamily {
    let ci = ci.clone();
    let cal = cal.clone();
    EciFamily::new(EciKind::Calibrated, move |alpha| {
        if alpha <= 0.0 {
            return ConfidenceRegion::FullSpace;
        }
        let level = cal.dual(1.0 / alpha);
        if level <= 0.0 {
            ConfidenceRegion::FullSpace
        } else if level >= 1.0 {
            ConfidenceRegion::EmptySet
        } else {
            ci.evaluate(level).unwrap_or(ConfidenceRegion::FullSpace)
        }
    })
}

/// Level grid and tolerance for [`p_dual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualGrid {
    pub points: usize,
    /// Smallest grid level; the largest is `1 - min_level`.
    pub min_level: f64,
    /// Relative bisection tolerance on the returned level.
    pub tol: f64,
}

impl Default for DualGrid {
    fn default() -> Self {
        Self {
            points: 512,
            min_level: 1e-16,
            tol: 1e-9,
        }
    }
}

impl DualGrid {
    fn levels(&self) -> Vec<f64> {
        let n = self.points.max(2);
        let lo = self.min_level.ln();
        let top = (1.0 - self.min_level).min(1.0 - f64::EPSILON / 2.0);
        let hi = top.ln();
        (0..n)
            .map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp().min(top))
            .collect()
    }
}

/// `inf{α ∈ [0,1] : θ ∉ C(α)}`, or 1 if `θ` is never excluded.
pub fn p_dual(ci: &EciFamily, theta: f64, grid: DualGrid) -> f64 {
    let excluded = |alpha: f64| {
        ci.evaluate(alpha)
            .map(|r| !r.covers(theta))
            .unwrap_or(false)
    };
    if excluded(0.0) {
        return 0.0;
    }
    let levels = grid.levels();
    let Some(first) = levels.iter().position(|&a| excluded(a)) else {
        return 1.0;
    };
    let mut lo = if first == 0 { 0.0 } else { levels[first - 1] };
    let mut hi = levels[first];
    for _ in 0..200 {
        if hi - lo <= grid.tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excluded(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `sup{1/α : α ∈ [0,1), θ ∉ C(α)}` with `sup ∅ = 1`; infinite when `θ` is
/// excluded at every level.
pub fn t_dual(ci: &EciFamily, theta: f64) -> f64 {
    let p = p_dual(ci, theta, DualGrid::default());
    if p >= 1.0 {
        1.0
    } else {
        1.0 / p
    }
}
