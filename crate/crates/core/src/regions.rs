//! Confidence regions over a real parameter and families of them indexed by
//! the miscoverage level `α`.

use std::fmt;
use std::sync::Arc;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of the real line.
///
/// Infinite endpoints are always treated as open. `NullComplement` is the
/// real line minus the closed interval `[null_lo, null_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfidenceRegion {
    Interval {
        lo: f64,
        hi: f64,
        lo_open: bool,
        hi_open: bool,
    },
    HalfLineAbove {
        lo: f64,
        lo_open: bool,
    },
    FullSpace,
    EmptySet,
    NullComplement {
        null_lo: f64,
        null_hi: f64,
    },
}

use ConfidenceRegion::*;

impl ConfidenceRegion {
    /// Builds an interval, normalizing degenerate and unbounded cases:
    /// an open or half-open interval with `lo == hi` is empty, `(-inf, inf)`
    /// is the full space and `(lo, inf)` is a half line.
    pub fn interval(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidRegion("NaN endpoint".into()));
        }
        if lo > hi {
            return Err(Error::InvalidRegion(format!("lo {lo} > hi {hi}")));
        }
        if lo == hi {
            if lo.is_infinite() || lo_open || hi_open {
                return Ok(EmptySet);
            }
            return Ok(Interval {
                lo,
                hi,
                lo_open: false,
                hi_open: false,
            });
        }
        let lo_open = lo_open || lo.is_infinite();
        let hi_open = hi_open || hi.is_infinite();
        Ok(match (lo == f64::NEG_INFINITY, hi == f64::INFINITY) {
            (true, true) => FullSpace,
            (false, true) => HalfLineAbove { lo, lo_open },
            _ => Interval {
                lo,
                hi,
                lo_open,
                hi_open,
            },
        })
    }

    pub fn open_interval(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(lo, hi, true, true)
    }

    pub fn closed_interval(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(lo, hi, false, false)
    }

    /// `center ± half_width` as an open interval; an infinite half-width
    /// gives the full space and a zero half-width the empty set.
    pub fn symmetric_open(center: f64, half_width: f64) -> Result<Self> {
        if center.is_nan() || half_width.is_nan() || half_width < 0.0 {
            return Err(Error::InvalidRegion(format!(
                "center {center}, half-width {half_width}"
            )));
        }
        if half_width.is_infinite() {
            return Ok(FullSpace);
        }
        Self::open_interval(center - half_width, center + half_width)
    }

    pub fn half_line_above(lo: f64, lo_open: bool) -> Result<Self> {
        Self::interval(lo, f64::INFINITY, lo_open, true)
    }

    pub fn null_complement(null_lo: f64, null_hi: f64) -> Result<Self> {
        if null_lo.is_nan() || null_hi.is_nan() {
            return Err(Error::InvalidRegion("NaN endpoint".into()));
        }
        if null_lo > null_hi {
            return Err(Error::InvalidRegion(format!(
                "null set [{null_lo}, {null_hi}] is empty"
            )));
        }
        Ok(NullComplement { null_lo, null_hi })
    }

    /// Coverage predicate `θ ∈ region`.
    pub fn covers(&self, theta: f64) -> bool {
        match *self {
            FullSpace => true,
            EmptySet => false,
            Interval {
                lo,
                hi,
                lo_open,
                hi_open,
            } => above(theta, lo, lo_open) && below(theta, hi, hi_open),
            HalfLineAbove { lo, lo_open } => above(theta, lo, lo_open),
            NullComplement { null_lo, null_hi } => theta < null_lo || theta > null_hi,
        }
    }

    /// Lebesgue length.
    pub fn width(&self) -> f64 {
        match *self {
            Interval { lo, hi, .. } => hi - lo,
            EmptySet => 0.0,
            FullSpace | HalfLineAbove { .. } | NullComplement { .. } => f64::INFINITY,
        }
    }

    /// Interval-like view `(lo, lo_open, hi, hi_open)` for the convex variants.
    fn bounds(&self) -> Option<(f64, bool, f64, bool)> {
        match *self {
            Interval {
                lo,
                hi,
                lo_open,
                hi_open,
            } => Some((lo, lo_open, hi, hi_open)),
            HalfLineAbove { lo, lo_open } => Some((lo, lo_open, f64::INFINITY, true)),
            FullSpace => Some((f64::NEG_INFINITY, true, f64::INFINITY, true)),
            EmptySet | NullComplement { .. } => None,
        }
    }

    /// Point-set inclusion `self ⊆ outer`.
    pub fn is_subset_of(&self, outer: &ConfidenceRegion) -> bool {
        contains_region(self, outer)
    }

    pub fn lower(&self) -> Option<f64> {
        self.bounds().map(|b| b.0)
    }

    pub fn upper(&self) -> Option<f64> {
        self.bounds().map(|b| b.2)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Interval { .. } => "interval",
            HalfLineAbove { .. } => "half_line_above",
            FullSpace => "full",
            EmptySet => "empty",
            NullComplement { .. } => "null_complement",
        }
    }
}

fn above(theta: f64, lo: f64, open: bool) -> bool {
    theta > lo || (!open && theta == lo)
}

fn below(theta: f64, hi: f64, open: bool) -> bool {
    theta < hi || (!open && theta == hi)
}

/// `inner ⊆ outer` as point sets.
pub fn contains_region(inner: &ConfidenceRegion, outer: &ConfidenceRegion) -> bool {
    match (inner, outer) {
        (EmptySet, _) => true,
        (_, FullSpace) => true,
        (_, EmptySet) => false,
        (
            NullComplement {
                null_lo: a,
                null_hi: b,
            },
            NullComplement {
                null_lo: c,
                null_hi: d,
            },
        ) => a <= c && d <= b,
        // Unbounded on both sides but not the full space.
        (NullComplement { .. }, _) => false,
        (_, NullComplement { null_lo, null_hi }) => {
            let (lo, lo_open, hi, hi_open) = inner.bounds().expect("convex region");
            let left_of = hi < *null_lo || (hi == *null_lo && hi_open);
            let right_of = lo > *null_hi || (lo == *null_hi && lo_open);
            left_of || right_of
        }
        _ => {
            let (ilo, ilo_open, ihi, ihi_open) = inner.bounds().expect("convex region");
            let (olo, olo_open, ohi, ohi_open) = outer.bounds().expect("convex region");
            let lower_ok = olo < ilo || (olo == ilo && (!olo_open || ilo_open));
            let upper_ok = ohi > ihi || (ohi == ihi && (!ohi_open || ihi_open));
            lower_ok && upper_ok
        }
    }
}

/// `covers(FullSpace, θ)`-style free function for callers that prefer it.
pub fn covers(region: &ConfidenceRegion, theta: f64) -> bool {
    region.covers(theta)
}

/// Width as a free function.
pub fn width(region: &ConfidenceRegion) -> f64 {
    region.width()
}

impl fmt::Display for ConfidenceRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Interval {
                lo,
                hi,
                lo_open,
                hi_open,
            } => write!(
                f,
                "{}{}, {}{}",
                if lo_open { '(' } else { '[' },
                lo,
                hi,
                if hi_open { ')' } else { ']' }
            ),
            HalfLineAbove { lo, lo_open } => {
                write!(f, "{}{}, inf)", if lo_open { '(' } else { '[' }, lo)
            }
            FullSpace => f.write_str("(-inf, inf)"),
            EmptySet => f.write_str("{}"),
            NullComplement { null_lo, null_hi } => {
                write!(f, "R \\ [{null_lo}, {null_hi}]")
            }
        }
    }
}

// JSON form: {"kind": ..., "lo": ..., "hi": ...} with infinities as strings.

fn ext_to_json(x: f64) -> serde_json::Value {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        serde_json::Number::from_f64(x)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

fn ext_from_json(v: &serde_json::Value) -> std::result::Result<f64, String> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| "bad number".to_string()),
        serde_json::Value::String(s) => match s.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(format!("expected number or \"inf\"/\"-inf\", got {other:?}")),
        },
        other => Err(format!("expected number, got {other}")),
    }
}

impl Serialize for ConfidenceRegion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("kind", self.kind_name())?;
        match *self {
            Interval {
                lo,
                hi,
                lo_open,
                hi_open,
            } => {
                map.serialize_entry("lo", &ext_to_json(lo))?;
                map.serialize_entry("hi", &ext_to_json(hi))?;
                map.serialize_entry("lo_open", &lo_open)?;
                map.serialize_entry("hi_open", &hi_open)?;
            }
            HalfLineAbove { lo, lo_open } => {
                map.serialize_entry("lo", &ext_to_json(lo))?;
                map.serialize_entry("hi", "inf")?;
                map.serialize_entry("lo_open", &lo_open)?;
            }
            FullSpace => {
                map.serialize_entry("lo", "-inf")?;
                map.serialize_entry("hi", "inf")?;
            }
            EmptySet => {}
            NullComplement { null_lo, null_hi } => {
                map.serialize_entry("lo", &ext_to_json(null_lo))?;
                map.serialize_entry("hi", &ext_to_json(null_hi))?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ConfidenceRegion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        let obj = value
            .as_object()
            .ok_or_else(|| de::Error::custom("region must be a JSON object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "kind" | "lo" | "hi" | "lo_open" | "hi_open") {
                return Err(de::Error::custom(format!("unknown region field {key:?}")));
            }
        }
        let kind = obj
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| de::Error::custom("region needs a string \"kind\""))?;
        let num = |key: &str| -> std::result::Result<f64, D::Error> {
            let v = obj
                .get(key)
                .ok_or_else(|| de::Error::custom(format!("region missing {key:?}")))?;
            ext_from_json(v).map_err(de::Error::custom)
        };
        let flag = |key: &str, default: bool| -> std::result::Result<bool, D::Error> {
            match obj.get(key) {
                None => Ok(default),
                Some(v) => v
                    .as_bool()
                    .ok_or_else(|| de::Error::custom(format!("{key:?} must be a boolean"))),
            }
        };
        let region = match kind {
            "interval" => ConfidenceRegion::interval(
                num("lo")?,
                num("hi")?,
                flag("lo_open", true)?,
                flag("hi_open", true)?,
            ),
            "half_line_above" => ConfidenceRegion::half_line_above(num("lo")?, flag("lo_open", true)?),
            "full" => Ok(FullSpace),
            "empty" => Ok(EmptySet),
            "null_complement" => ConfidenceRegion::null_complement(num("lo")?, num("hi")?),
            other => return Err(de::Error::custom(format!("unknown region kind {other:?}"))),
        };
        region.map_err(de::Error::custom)
    }
}

/// How an [`EciFamily`] was obtained. Only `FromEvalue` and `Calibrated`
/// families are e-CIs and may be fed to e-BY.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EciKind {
    FromEvalue,
    Calibrated,
    PlainCi,
}

impl EciKind {
    pub fn is_eci(self) -> bool {
        !matches!(self, EciKind::PlainCi)
    }
}

type RegionFn = dyn Fn(f64) -> ConfidenceRegion + Send + Sync;

/// A map `α ↦ C(α)` for `α ∈ [0, 1)`, nonincreasing in `α`.
///
/// `α = 0` is allowed and should give the trivial region.
#[derive(Clone)]
pub struct EciFamily {
    kind: EciKind,
    eval: Arc<RegionFn>,
}

impl fmt::Debug for EciFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EciFamily").field("kind", &self.kind).finish()
    }
}

impl EciFamily {
    pub fn new<F>(kind: EciKind, eval: F) -> Self
    where
        F: Fn(f64) -> ConfidenceRegion + Send + Sync + 'static,
    {
        Self {
            kind,
            eval: Arc::new(eval),
        }
    }

    /// Same region at every level.
    pub fn constant(kind: EciKind, region: ConfidenceRegion) -> Self {
        Self::new(kind, move |_| region)
    }

    /// Piecewise-constant family: `C(α) = regions[k]` for
    /// `thresholds[k] ≤ α < thresholds[k+1]` and `base` below the first
    /// threshold. Thresholds must increase strictly within `(0, 1)` and the
    /// regions must shrink, which makes the family nonincreasing and
    /// continuous from above.
    pub fn step(
        kind: EciKind,
        base: ConfidenceRegion,
        steps: Vec<(f64, ConfidenceRegion)>,
    ) -> Result<Self> {
        let mut prev_t = 0.0;
        let mut prev_region = base;
        for &(t, region) in &steps {
            if !(t > prev_t && t < 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "step thresholds must increase strictly within (0, 1), got {t}"
                )));
            }
            if !region.is_subset_of(&prev_region) {
                return Err(Error::InvalidSpec(format!(
                    "step region {region} at {t} is not inside {prev_region}"
                )));
            }
            prev_t = t;
            prev_region = region;
        }
        Ok(Self::new(kind, move |alpha| {
            let k = steps.partition_point(|&(t, _)| t <= alpha);
            if k == 0 {
                base
            } else {
                steps[k - 1].1
            }
        }))
    }

    pub fn kind(&self) -> EciKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: EciKind) -> Self {
        self.kind = kind;
        self
    }

    /// `C(α)`; errors unless `α ∈ [0, 1)`.
    pub fn evaluate(&self, alpha: f64) -> Result<ConfidenceRegion> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidLevel(alpha));
        }
        Ok((self.eval)(alpha))
    }

    /// Checks `C(α₂) ⊆ C(α₁)` for consecutive points of an increasing grid.
    pub fn is_monotone_on(&self, grid: &[f64]) -> bool {
        let regions: Vec<_> = grid.iter().map(|&a| self.evaluate(a)).collect();
        regions.windows(2).all(|w| match (&w[0], &w[1]) {
            (Ok(wide), Ok(narrow)) => narrow.is_subset_of(wide),
            _ => false,
        })
    }
}

/// `n` levels evenly spaced in the open unit interval.
pub fn level_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}
