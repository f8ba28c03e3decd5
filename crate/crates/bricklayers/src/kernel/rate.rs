//! Jump-rate functions on the integers.
//!
//! A bricklayer at site `i` lays a brick to its right with rate `r(ω_i)` and
//! to its left with rate `r(-ω_i)`. Product measures are stationary exactly
//! when the rate function satisfies the pairing constraint
//!
//! ```text
//! r(z) · r(-z + 1) = 1   for all integers z,
//! ```
//!
//! so custom rates are specified for `z >= 1` only and extended to `z <= 0`
//! through the constraint; it can then never be violated by input. The
//! exponential family `r(z) = e^{-β/2} e^{βz}` is the one family for which
//! parameter-step product measures stay closed under the dynamics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `|β z|` we allow inside an `exp`; beyond this doubles overflow.
const EXP_ARG_GUARD: f64 = 690.0;

/// Serializable description of a rate function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateSpec {
    Exponential { beta: f64 },
    /// `table[k]` is `r(k + 1)`; values for `z <= 0` follow from the pairing
    /// constraint.
    Custom { table: Vec<f64> },
}

#[derive(Debug, Clone)]
enum Kind {
    Exponential {
        beta: f64,
    },
    Custom {
        /// `log r(z)` for `z = 1..=table.len()`.
        log_table: Arc<[f64]>,
    },
}

/// A positive jump-rate function on a guarded integer range.
#[derive(Debug, Clone)]
pub struct RateFunction {
    kind: Kind,
    theta_bar: f64,
    monotone: bool,
    z_min: i64,
    z_max: i64,
}

impl RateFunction {
    /// The exponential family `r(z) = e^{-β/2} e^{βz}`, `β > 0`.
    pub fn exponential(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!(
                "exponential rate requires beta > 0, got {beta}"
            )));
        }
        let guard = (EXP_ARG_GUARD / beta).floor() as i64 - 1;
        Ok(RateFunction {
            kind: Kind::Exponential { beta },
            theta_bar: f64::INFINITY,
            monotone: true,
            z_min: -guard,
            z_max: guard,
        })
    }

    /// A tabulated rate: `table[k] = r(k + 1)` for `k = 0..len`. All entries
    /// must be positive; values at `z <= 0` are derived from the pairing
    /// constraint, so the valid argument range is `[1 - len, len]`.
    pub fn custom(table: Vec<f64>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::invalid("custom rate table needs at least 2 entries"));
        }
        if let Some(bad) = table.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!(
                "custom rate table entries must be positive and finite, got {bad}"
            )));
        }
        let log_table: Vec<f64> = table.iter().map(|v| v.ln()).collect();
        // Finite-table stand-in for liminf log r(n): the largest suffix
        // minimum of log r over the table.
        let mut suffix_min = f64::INFINITY;
        let mut theta_bar = f64::NEG_INFINITY;
        for &lr in log_table.iter().rev() {
            suffix_min = suffix_min.min(lr);
            theta_bar = theta_bar.max(suffix_min);
        }
        if !(theta_bar > 0.0) {
            return Err(Error::invalid(format!(
                "rate table has non-positive growth exponent {theta_bar}; \
                 no nondegenerate theta range exists"
            )));
        }
        let monotone = table.windows(2).all(|w| w[1] >= w[0]);
        let len = table.len() as i64;
        Ok(RateFunction {
            kind: Kind::Custom {
                log_table: log_table.into(),
            },
            theta_bar,
            monotone,
            z_min: 1 - len,
            z_max: len,
        })
    }

    /// The default non-exponential counterexample `r(z) = z + 1` for `z >= 1`:
    /// positive, increasing, with unbounded growth exponent.
    pub fn linear_counterexample(len: usize) -> Self {
        let table: Vec<f64> = (1..=len).map(|z| (z + 1) as f64).collect();
        RateFunction::custom(table).expect("linear table is valid")
    }

    /// A second counterexample, constant `r(z) = 2` for `z >= 1` (so 1/2 for
    /// `z <= 0`); its one-site measures are two-sided geometric.
    pub fn constant_counterexample(len: usize) -> Self {
        RateFunction::custom(vec![2.0; len]).expect("constant table is valid")
    }

    pub fn spec(&self) -> RateSpec {
        match &self.kind {
            Kind::Exponential { beta } => RateSpec::Exponential { beta: *beta },
            Kind::Custom { log_table } => RateSpec::Custom {
                table: log_table.iter().map(|l| l.exp()).collect(),
            },
        }
    }

    pub fn from_spec(spec: &RateSpec) -> Result<Self> {
        match spec {
            RateSpec::Exponential { beta } => RateFunction::exponential(*beta),
            RateSpec::Custom { table } => RateFunction::custom(table.clone()),
        }
    }

    /// `β` for the exponential kind, `None` otherwise.
    pub fn beta(&self) -> Option<f64> {
        match &self.kind {
            Kind::Exponential { beta } => Some(*beta),
            Kind::Custom { .. } => None,
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.kind, Kind::Exponential { .. })
    }

    /// Growth exponent bound: `θ` parameters must stay in `(-θ̄, θ̄)`.
    pub fn theta_bar(&self) -> f64 {
        self.theta_bar
    }

    /// Whether `r` is non-decreasing on its tabulated range (attractivity).
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Inclusive argument range on which `rate` can be evaluated.
    pub fn valid_range(&self) -> (i64, i64) {
        (self.z_min, self.z_max)
    }

    fn check_range(&self, z: i64) -> Result<()> {
        if z < self.z_min || z > self.z_max {
            Err(Error::RateRange {
                z,
                lo: self.z_min,
                hi: self.z_max,
            })
        } else {
            Ok(())
        }
    }

    /// `log r(z)`.
    pub fn log_rate(&self, z: i64) -> Result<f64> {
        self.check_range(z)?;
        Ok(self.log_rate_unchecked(z))
    }

    fn log_rate_unchecked(&self, z: i64) -> f64 {
        match &self.kind {
            Kind::Exponential { beta } => beta * (z as f64 - 0.5),
            Kind::Custom { log_table } => {
                if z >= 1 {
                    log_table[(z - 1) as usize]
                } else {
                    // r(z) = 1 / r(1 - z)
                    -log_table[(-z) as usize]
                }
            }
        }
    }

    /// `r(z)`, always positive and finite on the valid range.
    pub fn rate(&self, z: i64) -> Result<f64> {
        Ok(self.log_rate(z)?.exp())
    }

    /// `log r(z)!`. Defined by `r(0)! = 1` and the recursion
    /// `r(z+1)! = r(z)! · r(z+1)` in both directions; computed in the log
    /// domain so large `|z|` cannot overflow.
    pub fn log_rate_factorial(&self, z: i64) -> Result<f64> {
        // Forward recursion needs r(1..=z), downward needs r(z+1..=0), so the
        // factorial is defined one step below the rate's own lower guard.
        if z > self.z_max || z < self.z_min - 1 {
            return Err(Error::RateRange {
                z,
                lo: self.z_min - 1,
                hi: self.z_max,
            });
        }
        match &self.kind {
            // The forward product telescopes to β z²/2 exactly.
            Kind::Exponential { beta } => Ok(beta * (z as f64) * (z as f64) / 2.0),
            Kind::Custom { .. } => {
                let mut acc = 0.0;
                if z >= 0 {
                    for y in 1..=z {
                        acc += self.log_rate_unchecked(y);
                    }
                } else {
                    // Downward recursion: log r(w-1)! = log r(w)! - log r(w).
                    for w in (z + 1..=0).rev() {
                        acc -= self.log_rate_unchecked(w);
                    }
                }
                Ok(acc)
            }
        }
    }

    /// `r(z)!` in the plain domain (may overflow for large `|z|`; use the log
    /// form for measure construction).
    pub fn rate_factorial(&self, z: i64) -> Result<f64> {
        Ok(self.log_rate_factorial(z)?.exp())
    }

    /// Table of `r(z)` over `lo..=hi` for hot loops; errors if the window
    /// exceeds the valid range.
    pub fn rate_table(&self, lo: i64, hi: i64) -> Result<RateTable> {
        self.check_range(lo)?;
        self.check_range(hi)?;
        let values: Vec<f64> = (lo..=hi).map(|z| self.log_rate_unchecked(z).exp()).collect();
        Ok(RateTable { lo, values })
    }
}

/// Dense lookup table of rates over a contiguous window.
#[derive(Debug, Clone)]
pub struct RateTable {
    lo: i64,
    values: Vec<f64>,
}

impl RateTable {
    #[inline]
    pub fn rate(&self, z: i64) -> f64 {
        self.values[(z - self.lo) as usize]
    }

    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.lo + self.values.len() as i64 - 1)
    }
}
