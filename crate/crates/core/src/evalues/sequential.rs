//! Hoeffding e-processes and the two-sided confidence sequence built from
//! them.

use crate::error::{Error, Result};
use crate::regions::{ConfidenceRegion, EciFamily, EciKind};

/// Which one-sided e-process to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Bets on observations exceeding θ.
    Plus,
    /// Bets on observations falling below θ.
    Minus,
    /// `max(E⁺/2, E⁻/2)`.
    TwoSided,
}

/// Running sums of a Hoeffding e-process over observations in
/// `[range_lo, range_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EProcessState {
    pub t: u64,
    pub sum_lambda: f64,
    pub sum_lambda_x: f64,
    pub sum_lambda_sq: f64,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl EProcessState {
    pub fn new(range_lo: f64, range_hi: f64) -> Result<Self> {
        if !(range_lo.is_finite() && range_hi.is_finite() && range_lo < range_hi) {
            return Err(Error::InvalidSpec(format!(
                "range [{range_lo}, {range_hi}] must be finite and nondegenerate"
            )));
        }
        Ok(Self {
            t: 0,
            sum_lambda: 0.0,
            sum_lambda_x: 0.0,
            sum_lambda_sq: 0.0,
            range_lo,
            range_hi,
        })
    }

    pub fn span(&self) -> f64 {
        self.range_hi - self.range_lo
    }

    /// Adds observation `x` with bet `lambda`, which must have been chosen
    /// before `x` was seen.
    pub fn update(&self, x: f64, lambda: f64) -> Result<Self> {
        if !(self.range_lo..=self.range_hi).contains(&x) {
            return Err(Error::OutOfRange {
                x,
                lo: self.range_lo,
                hi: self.range_hi,
            });
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidLambda(lambda));
        }
        Ok(Self {
            t: self.t + 1,
            sum_lambda: self.sum_lambda + lambda,
            sum_lambda_x: self.sum_lambda_x + lambda * x,
            sum_lambda_sq: self.sum_lambda_sq + lambda * lambda,
            ..*self
        })
    }

    fn penalty(&self) -> f64 {
        let r = self.span();
        r * r * self.sum_lambda_sq / 8.0
    }

    /// Log of the e-process at `θ`.
    pub fn log_evalue(&self, theta: f64, side: Side) -> f64 {
        let drift = self.sum_lambda_x - theta * self.sum_lambda;
        let pen = self.penalty();
        match side {
            Side::Plus => drift - pen,
            Side::Minus => -drift - pen,
            Side::TwoSided => drift.abs() - pen - std::f64::consts::LN_2,
        }
    }

    pub fn evalue(&self, theta: f64, side: Side) -> f64 {
        self.log_evalue(theta, side).exp()
    }

    /// Confidence-sequence interval at level `alpha`:
    /// `Σλx/Σλ ± (log(2/α) + r²Σλ²/8)/Σλ`.
    pub fn interval(&self, alpha: f64) -> Result<ConfidenceRegion> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidLevel(alpha));
        }
        Ok(self.region_at(alpha))
    }

    fn region_at(&self, alpha: f64) -> ConfidenceRegion {
        if alpha <= 0.0 || self.sum_lambda <= 0.0 {
            return ConfidenceRegion::FullSpace;
        }
        let center = self.sum_lambda_x / self.sum_lambda;
        let half = ((2.0 / alpha).ln() + self.penalty()) / self.sum_lambda;
        ConfidenceRegion::symmetric_open(center, half).unwrap_or(ConfidenceRegion::FullSpace)
    }

    /// The current interval as an e-CI family over all levels.
    pub fn as_eci(&self) -> EciFamily {
        let state = *self;
        EciFamily::new(EciKind::FromEvalue, move |alpha| state.region_at(alpha))
    }
}

/// A predictable betting schedule: the bet for time `t + 1` may depend only
/// on the state after `t` observations.
pub trait LambdaSchedule {
    fn next_lambda(&self, state: &EProcessState) -> f64;
}

/// The same bet at every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLambda(pub f64);

impl ConstantLambda {
    /// `λ = sqrt(8·log(2/α')/n_target)/r`, which makes the interval at time
    /// `n_target` and level `α'` match the batch Hoeffding interval.
    pub fn tuned(alpha_prime: f64, n_target: u64, span: f64) -> Result<Self> {
        if !(alpha_prime > 0.0 && alpha_prime < 1.0) {
            return Err(Error::InvalidLevel(alpha_prime));
        }
        if n_target == 0 || !(span > 0.0 && span.is_finite()) {
            return Err(Error::InvalidSpec("tuned bet needs n_target >= 1 and span > 0".into()));
        }
        Ok(Self(
            (8.0 * (2.0 / alpha_prime).ln() / n_target as f64).sqrt() / span,
        ))
    }
}

impl LambdaSchedule for ConstantLambda {
    fn next_lambda(&self, _state: &EProcessState) -> f64 {
        self.0
    }
}

impl<F: Fn(&EProcessState) -> f64> LambdaSchedule for F {
    fn next_lambda(&self, state: &EProcessState) -> f64 {
        self(state)
    }
}

/// An e-process driven by a schedule. Bets are always drawn before the
/// observation they multiply.
#[derive(Debug, Clone)]
pub struct ConfidenceSequence<S> {
    state: EProcessState,
    schedule: S,
}

impl<S: LambdaSchedule> ConfidenceSequence<S> {
    pub fn new(range_lo: f64, range_hi: f64, schedule: S) -> Result<Self> {
        Ok(Self {
            state: EProcessState::new(range_lo, range_hi)?,
            schedule,
        })
    }

    pub fn observe(&mut self, x: f64) -> Result<&EProcessState> {
        let lambda = self.schedule.next_lambda(&self.state);
        self.state = self.state.update(x, lambda)?;
        Ok(&self.state)
    }

    pub fn state(&self) -> &EProcessState {
        &self.state
    }

    pub fn interval(&self, alpha: f64) -> Result<ConfidenceRegion> {
        self.state.interval(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::level_grid;

    #[test]
    fn single_update_arithmetic() {
        let s = EProcessState::new(0.0, 1.0).unwrap().update(0.5, 1.0).unwrap();
        assert_eq!(s.t, 1);
        assert_eq!((s.sum_lambda, s.sum_lambda_x, s.sum_lambda_sq), (1.0, 0.5, 1.0));
    }

    #[test]
    fn updates_commute() {
        let s0 = EProcessState::new(0.0, 1.0).unwrap();
        let a = s0.update(0.25, 0.5).unwrap().update(0.75, 2.0).unwrap();
        let b = s0.update(0.75, 2.0).unwrap().update(0.25, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s0 = EProcessState::new(0.0, 1.0).unwrap();
        assert!(matches!(s0.update(2.0, 1.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(s0.update(0.5, -1.0), Err(Error::InvalidLambda(_))));
        assert!(matches!(s0.update(0.5, f64::NAN), Err(Error::InvalidLambda(_))));
        assert!(EProcessState::new(1.0, 0.0).is_err());
    }

    #[test]
    fn empty_state() {
        let s0 = EProcessState::new(0.0, 1.0).unwrap();
        for side in [Side::Plus, Side::Minus] {
            assert_eq!(s0.evalue(0.3, side), 1.0);
        }
        assert_eq!(s0.interval(0.05).unwrap(), ConfidenceRegion::FullSpace);
    }

    #[test]
    fn constant_bet_examples() {
        let mut s = EProcessState::new(0.0, 1.0).unwrap();
        for k in 0..100 {
            s = s.update(if k % 2 == 0 { 0.2 } else { 0.6 }, 0.5).unwrap();
        }
        let plus = s.evalue(0.4, Side::Plus);
        assert!((plus - (-3.125f64).exp()).abs() < 1e-12);
        assert!((plus - 0.04394).abs() < 1e-5);
        let r = s.interval(0.05).unwrap();
        let half = (40f64.ln() + 3.125) / 50.0;
        assert!((half - 0.13628).abs() < 1e-5);
        assert!((r.upper().unwrap() - (0.4 + half)).abs() < 1e-12);
        assert!(s.interval(1.0).is_err());
    }

    #[test]
    fn interval_is_sublevel_set_of_two_sided_evalue() {
        let mut s = EProcessState::new(-1.0, 1.0).unwrap();
        for (k, x) in [0.3, -0.1, 0.9, 0.2, -0.7, 0.4].iter().enumerate() {
            s = s.update(*x, 0.2 + 0.1 * k as f64).unwrap();
        }
        for alpha in [0.01, 0.1, 0.5] {
            let r = s.interval(alpha).unwrap();
            let (lo, hi) = (r.lower().unwrap(), r.upper().unwrap());
            for theta in [lo, hi] {
                assert!((s.evalue(theta, Side::TwoSided) - 1.0 / alpha).abs() < 1e-9 / alpha);
            }
            let mid = 0.5 * (lo + hi);
            assert!(s.evalue(mid, Side::TwoSided) < 1.0 / alpha);
        }
        assert!(s.as_eci().is_monotone_on(&level_grid(100)));
    }

    #[test]
    fn tuned_schedule_matches_batch_at_target() {
        let n = 64;
        let sched = ConstantLambda::tuned(0.05, n, 1.0).unwrap();
        let mut cs = ConfidenceSequence::new(0.0, 1.0, sched).unwrap();
        for _ in 0..n {
            cs.observe(0.5).unwrap();
        }
        let half = cs.interval(0.05).unwrap().width() / 2.0;
        let batch = super::super::plain_half_width(n, 1.0, 0.05);
        assert!((half - batch).abs() < 1e-12);
    }

    #[test]
    fn closure_schedule_sees_only_the_past() {
        let mut cs = ConfidenceSequence::new(0.0, 1.0, |s: &EProcessState| 1.0 / (s.t as f64 + 1.0)).unwrap();
        cs.observe(0.1).unwrap();
        cs.observe(0.9).unwrap();
        assert_eq!(cs.state().sum_lambda, 1.5);
        assert!((cs.state().sum_lambda_x - 0.55).abs() < 1e-15);
    }
}
