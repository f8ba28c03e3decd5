//! Site-indexed parameter profiles `θ_i` with finitely many values.
//!
//! A profile is `theta_left` for all sites left of the first step and takes
//! the value of the last step from `i -> +∞`. Steps are stored as
//! `(site, value)` pairs meaning "θ equals `value` from this site rightward".
//! Downward steps in multiples of `β` describe shock measures; a step of `β`
//! in `θ` moves the one-site mean by exactly one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One breakpoint: `theta` holds from `site` (inclusive) rightward,
/// until the next breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileStep {
    pub site: i64,
    pub theta: f64,
}

/// A parameter vector with finitely many distinct values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterProfile {
    theta_left: f64,
    steps: Vec<ProfileStep>,
    /// Step quantum used when bumping the profile or mapping it onto shock
    /// walkers; for the exponential model this is the model's `β`.
    beta: Option<f64>,
}

impl ParameterProfile {
    /// Spatially constant profile.
    pub fn constant(theta: f64) -> Self {
        ParameterProfile {
            theta_left: theta,
            steps: Vec::new(),
            beta: None,
        }
    }

    /// Single shock: `θ_i = theta_left` for `i <= q-1`, `theta_right` for
    /// `i >= q` — a shock measure located at `q - 1/2`.
    pub fn single_shock(theta_left: f64, theta_right: f64, q: i64) -> Self {
        ParameterProfile {
            theta_left,
            steps: vec![ProfileStep {
                site: q,
                theta: theta_right,
            }],
            beta: None,
        }
    }

    /// Build from an explicit step list; sites must be strictly increasing.
    pub fn from_steps(theta_left: f64, steps: Vec<ProfileStep>, beta: Option<f64>) -> Result<Self> {
        if steps.windows(2).any(|w| w[1].site <= w[0].site) {
            return Err(Error::invalid("profile steps must have increasing sites"));
        }
        if let Some(b) = beta {
            if !(b > 0.0) {
                return Err(Error::invalid(format!("profile beta must be > 0, got {b}")));
            }
        }
        let mut p = ParameterProfile {
            theta_left,
            steps,
            beta,
        };
        p.normalize();
        Ok(p)
    }

    /// Attach the step quantum `β`.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn theta_left(&self) -> f64 {
        self.theta_left
    }

    pub fn theta_right(&self) -> f64 {
        self.steps.last().map_or(self.theta_left, |s| s.theta)
    }

    pub fn steps(&self) -> &[ProfileStep] {
        &self.steps
    }

    /// `θ_i`.
    pub fn theta_at(&self, i: i64) -> f64 {
        match self.steps.iter().rev().find(|s| s.site <= i) {
            Some(s) => s.theta,
            None => self.theta_left,
        }
    }

    /// `θ` values over an inclusive site window.
    pub fn values_on(&self, lo: i64, hi: i64) -> Vec<f64> {
        (lo..=hi).map(|i| self.theta_at(i)).collect()
    }

    /// Bond indices `i` with `θ_i != θ_{i+1}` (the profile changes between
    /// sites `i` and `i+1`).
    pub fn discontinuities(&self) -> Vec<i64> {
        self.steps.iter().map(|s| s.site - 1).collect()
    }

    /// Profile with `θ` at one site changed by `delta` (all other sites
    /// unchanged), as produced by the closure evolution.
    pub fn bumped(&self, site: i64, delta: f64) -> Self {
        let mut candidates: Vec<i64> = self.steps.iter().map(|s| s.site).collect();
        for s in [site, site + 1] {
            if !candidates.contains(&s) {
                candidates.push(s);
            }
        }
        candidates.sort_unstable();
        let value = |i: i64| self.theta_at(i) + if i == site { delta } else { 0.0 };
        let steps = candidates
            .into_iter()
            .map(|s| ProfileStep {
                site: s,
                theta: value(s),
            })
            .collect();
        let mut p = ParameterProfile {
            theta_left: self.theta_left,
            steps,
            beta: self.beta,
        };
        p.normalize();
        p
    }

    /// True iff `θ_i` is non-increasing in `i`.
    pub fn is_decreasing(&self) -> bool {
        let mut prev = self.theta_left;
        for s in &self.steps {
            if s.theta > prev {
                return false;
            }
            prev = s.theta;
        }
        true
    }

    /// True iff all consecutive `θ` differences are integer multiples of
    /// `beta` within `tol`.
    pub fn is_beta_quantized(&self, beta: f64, tol: f64) -> bool {
        let mut prev = self.theta_left;
        for s in &self.steps {
            let k = (prev - s.theta) / beta;
            if (k - k.round()).abs() > tol {
                return false;
            }
            prev = s.theta;
        }
        true
    }

    /// Distinct `θ` values in left-to-right order.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut vals = vec![self.theta_left];
        for s in &self.steps {
            vals.push(s.theta);
        }
        vals
    }

    /// Drop steps that do not change the value.
    fn normalize(&mut self) {
        let mut prev = self.theta_left;
        self.steps.retain(|s| {
            let keep = s.theta != prev;
            if keep {
                prev = s.theta;
            }
            keep
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_shock_layout() {
        let p = ParameterProfile::single_shock(1.0, 0.0, 3);
        assert_eq!(p.theta_at(2), 1.0);
        assert_eq!(p.theta_at(3), 0.0);
        assert_eq!(p.theta_at(100), 0.0);
        assert_eq!(p.theta_right(), 0.0);
        assert_eq!(p.discontinuities(), vec![2]);
    }

    #[test]
    fn bump_moves_single_site() {
        let p = ParameterProfile::single_shock(1.0, 0.0, 0).with_beta(1.0);
        let b = p.bumped(0, 1.0);
        // Raising θ_0 by β moves the shock from -1/2 to +1/2.
        for i in -4..=4 {
            let expect = if i <= 0 { 1.0 } else { 0.0 };
            assert_eq!(b.theta_at(i), expect, "site {i}");
        }
        assert_eq!(b.discontinuities(), vec![0]);

        let c = p.bumped(-1, -1.0);
        for i in -4..=4 {
            let expect = if i <= -2 { 1.0 } else { 0.0 };
            assert_eq!(c.theta_at(i), expect, "site {i}");
        }
    }

    #[test]
    fn bump_in_constant_region_creates_island() {
        let p = ParameterProfile::constant(0.5);
        let b = p.bumped(2, 0.25);
        assert_eq!(b.theta_at(1), 0.5);
        assert_eq!(b.theta_at(2), 0.75);
        assert_eq!(b.theta_at(3), 0.5);
        assert_eq!(b.discontinuities(), vec![1, 2]);
    }

    #[test]
    fn classification_flags() {
        let p = ParameterProfile::from_steps(
            2.0,
            vec![
                ProfileStep { site: 0, theta: 1.0 },
                ProfileStep { site: 2, theta: 0.0 },
            ],
            Some(1.0),
        )
        .unwrap();
        assert!(p.is_decreasing());
        assert!(p.is_beta_quantized(1.0, 1e-9));
        assert!(!p.is_beta_quantized(0.75, 1e-9));

        let q = ParameterProfile::from_steps(
            0.0,
            vec![ProfileStep { site: 0, theta: 0.5 }],
            None,
        )
        .unwrap();
        assert!(!q.is_decreasing());
    }

    #[test]
    fn redundant_steps_are_dropped() {
        let p = ParameterProfile::from_steps(
            1.0,
            vec![
                ProfileStep { site: 0, theta: 1.0 },
                ProfileStep { site: 2, theta: 0.5 },
            ],
            None,
        )
        .unwrap();
        assert_eq!(p.steps().len(), 1);
        assert_eq!(p.discontinuities(), vec![1]);
    }

    #[test]
    fn rejects_unsorted_steps() {
        assert!(ParameterProfile::from_steps(
            0.0,
            vec![
                ProfileStep { site: 3, theta: 1.0 },
                ProfileStep { site: 1, theta: 2.0 },
            ],
            None,
        )
        .is_err());
    }

    #[test]
    fn serde_round_trip() {
        let p = ParameterProfile::single_shock(0.5, -0.5, 0).with_beta(1.0);
        let json = serde_json::to_string(&p).unwrap();
        let back: ParameterProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
    }
}
