use thiserror::Error;

/// Errors produced by region construction, e-value constructors, procedures
/// and experiment runners.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid level {0}: must lie in the open unit interval")]
    InvalidLevel(f64),
    #[error("e-value family is not unimodal on the search bracket")]
    NonUnimodal,
    #[error("observation {x} outside declared range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("invalid bet {0}: predictable lambda must be finite and nonnegative")]
    InvalidLambda(f64),
    #[error("universal inference split is empty")]
    EmptySplit,
    #[error("two-sided e-values are not inverses: {e_plus} * {e_minus} != 1")]
    NotInverse { e_plus: f64, e_minus: f64 },
    #[error("power calibrator requires kappa in (0, 1), got {0}")]
    InvalidKappa(f64),
    #[error("family for index {0} is a plain CI; e-BY requires an e-CI")]
    NotAnEci(usize),
    #[error("weights sum to {sum}, exceeding K = {k}")]
    WeightSumExceeded { sum: f64, k: usize },
    #[error("no direction recorded for rejected index {0}")]
    MissingDirection(usize),
    #[error("boundaries must be positive, got a = {a}, b = {b}")]
    InvalidBoundary { a: f64, b: f64 },
    #[error("invalid gamma {gamma}: need 1 <= gamma < beta = {beta}")]
    InvalidGamma { gamma: f64, beta: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("Monte-Carlo estimation needs at least 2 replications, got {0}")]
    TooFewReplications(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
