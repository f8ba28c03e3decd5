//! Mixture predictions from the walker description, compared against Monte
//! Carlo estimates and against the exact finite-chain oracle.
//!
//! A decreasing `β`-quantized profile evolves into a mixture of shock
//! measures whose weights follow the walker law. The predicted mean profile
//! is therefore a walker-law average of step profiles, and a per-site
//! z-score against replica estimates (with a Bonferroni-style multiplicity
//! correction) is the acceptance comparison.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactgen::{restricted_product_law, TruncatedLaw};
use crate::kernel::{build_measure, RateFunction};
use crate::mcsim::ProfileEstimate;
use crate::util::stats::{poisson_difference_pmf, z_threshold};
use crate::walkers::{master_equation, WalkerConfig, WalkerLaw};

/// Predicted mean slopes over a site range.
#[derive(Debug, Clone)]
pub struct MixturePrediction {
    pub sites: Vec<i64>,
    pub mean: Vec<f64>,
    /// Probability mass the walker law lost to its position window.
    pub walker_leak: f64,
}

/// Mean-profile prediction by averaging step profiles over the exact walker
/// law at time `t`.
pub fn predicted_profile(
    rf: &RateFunction,
    cfg0: &WalkerConfig,
    t: f64,
    sites: (i64, i64),
    tail_tol: f64,
) -> Result<MixturePrediction> {
    let law = master_equation(cfg0, t, None)?;
    predicted_profile_from_law(rf, &law, cfg0, sites, tail_tol)
}

/// Same, from a precomputed walker law.
pub fn predicted_profile_from_law(
    rf: &RateFunction,
    law: &WalkerLaw,
    cfg0: &WalkerConfig,
    sites: (i64, i64),
    tail_tol: f64,
) -> Result<MixturePrediction> {
    let beta = cfg0.beta();
    let theta_left = cfg0.theta_left();
    // One-site means per walker count k on the left: u(θ_left - kβ).
    let mut u_of_k: Vec<f64> = Vec::with_capacity(cfg0.n() + 1);
    for k in 0..=cfg0.n() {
        u_of_k.push(build_measure(rf, theta_left - k as f64 * beta, tail_tol)?.mean());
    }
    let (lo, hi) = sites;
    let mut mean = Vec::with_capacity((hi - lo + 1) as usize);
    for i in lo..=hi {
        let mut m = 0.0;
        for (state, p) in law.states.iter().zip(&law.probs) {
            let k = state.iter().filter(|&&q| q <= i).count();
            m += p * u_of_k[k];
        }
        mean.push(m);
    }
    // Renormalize by the covered walker mass so the prediction stays a
    // proper average when the window leaked.
    let mass: f64 = law.probs.iter().sum();
    if mass > 0.0 {
        for m in &mut mean {
            *m /= mass;
        }
    }
    Ok(MixturePrediction {
        sites: (lo..=hi).collect(),
        mean,
        walker_leak: law.leak,
    })
}

/// The single-shock location law: a difference of independent Poisson
/// counts with means `(e^{θ_l} - e^{θ_r}) t` (right) and
/// `(e^{-θ_r} - e^{-θ_l}) t` (left). Returned as `(d_min, pmf)` over
/// displacements.
pub fn shock_displacement_pmf(theta_left: f64, theta_right: f64, t: f64) -> (i64, Vec<f64>) {
    let right = theta_left.exp() - theta_right.exp();
    let left = (-theta_right).exp() - (-theta_left).exp();
    poisson_difference_pmf(right * t, left * t)
}

/// Mean-profile prediction for a single shock started at step site `q0`,
/// using the closed-form displacement law instead of the master equation.
pub fn predicted_single_shock_profile(
    rf: &RateFunction,
    theta_left: f64,
    theta_right: f64,
    q0: i64,
    t: f64,
    sites: (i64, i64),
    tail_tol: f64,
) -> Result<MixturePrediction> {
    let u_left = build_measure(rf, theta_left, tail_tol)?.mean();
    let u_right = build_measure(rf, theta_right, tail_tol)?.mean();
    let (d_min, pmf) = shock_displacement_pmf(theta_left, theta_right, t);
    let (lo, hi) = sites;
    let mut mean = Vec::with_capacity((hi - lo + 1) as usize);
    for i in lo..=hi {
        // E ω_i = u_r + (u_l - u_r) P(Q > i), Q = q0 + displacement.
        let p_right_of_i: f64 = pmf
            .iter()
            .enumerate()
            .filter(|(idx, _)| q0 + d_min + *idx as i64 > i)
            .map(|(_, p)| p)
            .sum();
        mean.push(u_right + (u_left - u_right) * p_right_of_i);
    }
    Ok(MixturePrediction {
        sites: (lo..=hi).collect(),
        mean,
        walker_leak: 0.0,
    })
}

/// Per-site z-scores of an estimate against a prediction.
#[derive(Debug, Clone, Serialize)]
pub struct ZComparison {
    pub sites: Vec<i64>,
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    /// Per-site threshold: `z_base` Bonferroni-corrected for the site count.
    pub z_crit: f64,
    pub passed: bool,
}

pub fn z_compare(
    estimate: &ProfileEstimate,
    prediction: &MixturePrediction,
    z_base: f64,
) -> Result<ZComparison> {
    if estimate.sites != prediction.sites {
        return Err(Error::invalid("estimate and prediction cover different sites"));
    }
    let mut z = Vec::with_capacity(estimate.sites.len());
    let mut max_abs: f64 = 0.0;
    for k in 0..estimate.sites.len() {
        let zi = (estimate.mean[k] - prediction.mean[k]) / estimate.stderr[k];
        max_abs = max_abs.max(zi.abs());
        z.push(zi);
    }
    let z_crit = z_threshold(z_base, estimate.sites.len());
    Ok(ZComparison {
        sites: estimate.sites.clone(),
        z,
        max_abs_z: max_abs,
        z_crit,
        passed: max_abs <= z_crit,
    })
}

/// The walker-law mixture of restricted product laws on a truncated chain:
/// the comparison target for the finite-chain evolution oracle.
pub fn mixture_chain_law(
    rf: &RateFunction,
    law: &WalkerLaw,
    cfg0: &WalkerConfig,
    sites: (i64, i64),
    window: (i64, i64),
    tail_tol: f64,
) -> Result<TruncatedLaw> {
    let mut combined: Option<TruncatedLaw> = None;
    let mut init_truncation = 0.0;
    let mut cache: HashMap<&[i64], TruncatedLaw> = HashMap::new();
    for (state, p) in law.states.iter().zip(&law.probs) {
        if *p == 0.0 {
            continue;
        }
        if !cache.contains_key(state.as_slice()) {
            let cfg = WalkerConfig::new(state.clone(), cfg0.theta_left(), cfg0.beta())?;
            let profile = cfg.to_profile();
            let part = restricted_product_law(rf, &profile, sites, window, tail_tol)?;
            cache.insert(state.as_slice(), part);
        }
        let part = &cache[state.as_slice()];
        init_truncation += p * part.init_truncation;
        match combined.as_mut() {
            None => {
                let mut first = part.clone();
                for v in &mut first.probs {
                    *v *= p;
                }
                first.init_truncation = 0.0;
                combined = Some(first);
            }
            Some(acc) => {
                for (a, b) in acc.probs.iter_mut().zip(&part.probs) {
                    *a += p * b;
                }
            }
        }
    }
    let mut out = combined.ok_or_else(|| Error::invalid("walker law has no mass"))?;
    out.init_truncation = init_truncation;
    out.flux_leak = law.leak;
    Ok(out)
}
