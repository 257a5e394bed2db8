//! E-value based post-selection inference.
//!
//! Given `K` parameters with (e-)confidence interval constructors and an
//! arbitrary data-dependent selection `S`, the e-BY procedure reports
//! `C_i(δ|S|/K)` for every selected `i` and keeps the false coverage rate at
//! or below `δ` under any dependence and any selection rule, provided the
//! intervals invert e-values.
//!
//! Module map:
//!
//! * [`regions`]: confidence regions over the real line and e-CI families.
//! * [`evalues`]: e-value families and concrete e-CI constructors (Hoeffding,
//!   confidence sequences, universal inference, indicator and directional).
//! * [`calibration`]: p-dual / t-dual of a CI family, calibrators and
//!   CI to e-CI calibration.
//! * [`procedures`]: selection rules (threshold, BH, e-BH) and the e-BY,
//!   weighted e-BY and BY level corrections.
//! * [`metrics`]: FCP, FDP, directional FDP and a seeded parallel Monte-Carlo
//!   harness.
//! * [`experiments`]: the width/FCR simulation, the Brownian sharpness
//!   construction, the e-BH reduction and the crossover analysis.

pub mod calibration;
pub mod error;
pub mod evalues;
pub mod experiments;
pub mod metrics;
pub mod procedures;
mod quadrature;
pub mod regions;

pub use error::{Error, Result};
pub use quadrature::integrate;
pub use regions::{ConfidenceRegion, EciFamily, EciKind};
