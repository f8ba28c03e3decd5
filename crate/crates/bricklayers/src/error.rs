//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by rate-function evaluation, measure construction,
/// simulation, and the exact-evolution oracles.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Rate-function argument outside the range where it can be evaluated
    /// without overflow (exponential kind) or outside the table (custom kind).
    #[error("rate argument z = {z} outside evaluable range [{lo}, {hi}]")]
    RateRange { z: i64, lo: i64, hi: i64 },

    /// Measure parameter outside the open interval where the partition sum
    /// converges.
    #[error("theta = {theta} outside (-{theta_bar}, {theta_bar})")]
    ThetaRange { theta: f64, theta_bar: f64 },

    /// The truncated partition sum did not converge within the support cap.
    #[error("site-measure sum failed to converge within support cap {cap} (theta = {theta})")]
    MeasureDiverged { theta: f64, cap: i64 },

    /// Target slope density outside the range attainable by the mean map.
    #[error("u = {u} outside attainable range [{lo}, {hi}]")]
    SlopeRange { u: f64, lo: f64, hi: f64 },

    /// Cylinder-function support wider than the enumeration guard allows.
    #[error("cylinder support width {width} exceeds complexity guard {guard}")]
    SupportTooWide { width: usize, guard: usize },

    /// A cylinder function returned a value above its declared bound.
    #[error("cylinder function value {value} exceeds declared bound {bound}")]
    BoundExceeded { value: f64, bound: f64 },

    /// Truncated state space too large for the exact-evolution oracle.
    #[error("state space size {size} exceeds limit {limit}")]
    StateSpaceTooLarge { size: usize, limit: usize },

    /// A slope variable left the configured safety band during simulation.
    #[error("slope {value} at site {site} breached omega cap {cap}; aborting run")]
    OmegaCapBreached { site: i64, value: i64, cap: i64 },

    /// Queried walker position holds no walker.
    #[error("no walker at position {site} - 1/2")]
    UnoccupiedPosition { site: i64 },

    /// Catch-all for invalid arguments and malformed inputs.
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
