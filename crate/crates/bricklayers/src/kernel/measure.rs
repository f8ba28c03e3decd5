//! One-site probability measures `μ^(θ)(z) ∝ e^{θz} / r(z)!`.
//!
//! For a parameter `θ` in `(-θ̄, θ̄)` the infinite sum converges; we work with
//! an adaptively truncated support whose tail mass is below a configurable
//! tolerance. For the exponential rate family the measure is the discrete
//! normal `μ(z) ∝ e^{-(β/2)(z - θ/β)²}`, so the window is centered at the
//! mode `round(θ/β)`; custom rates grow a symmetric window around zero with a
//! hard cap and an explicit convergence check.
//!
//! Two ratio identities pin the construction down and are asserted in tests:
//! `e^θ μ(z-1)/μ(z) = r(z)` and `e^{-θ} μ(z+1)/μ(z) = r(-z)`, whence
//! `E r(ω) = e^θ` and `E r(-ω) = e^{-θ}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::rate::{RateFunction, RateSpec};

/// Default truncated tail mass for measure construction.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Hard support cap for custom (tabulated) rates.
const CUSTOM_SUPPORT_CAP: i64 = 200;

/// Serializable description of a one-site measure: the rate function plus
/// `(θ, tail_tol)`; the pmf itself is reconstructed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub rate: RateSpec,
    pub theta: f64,
    pub tail_tol: f64,
}

impl MeasureSpec {
    pub fn build(&self) -> Result<SiteMeasure> {
        let rf = RateFunction::from_spec(&self.rate)?;
        build_measure(&rf, self.theta, self.tail_tol)
    }
}

/// A one-site measure on a truncated integer support.
#[derive(Debug, Clone)]
pub struct SiteMeasure {
    rate: RateFunction,
    theta: f64,
    z_lo: i64,
    pmf: Vec<f64>,
    /// Truncated partition value `Σ e^{θz}/r(z)!` over the support.
    z_part: f64,
    tail_tol: f64,
}

/// Build the measure for `rf` at parameter `theta`, truncating the support so
/// the neglected tail mass is below `tail_tol`.
pub fn build_measure(rf: &RateFunction, theta: f64, tail_tol: f64) -> Result<SiteMeasure> {
    if !(tail_tol > 0.0) {
        return Err(Error::invalid(format!("tail_tol must be > 0, got {tail_tol}")));
    }
    if !theta.is_finite() || theta.abs() >= rf.theta_bar() {
        return Err(Error::ThetaRange {
            theta,
            theta_bar: rf.theta_bar(),
        });
    }

    // Log-domain term at z, relative offset handled by normalization later.
    let log_term = |z: i64| -> Result<f64> { Ok(theta * z as f64 - rf.log_rate_factorial(z)?) };

    let (center, cap) = match rf.beta() {
        Some(beta) => {
            let mode = (theta / beta).round() as i64;
            let (rlo, rhi) = rf.valid_range();
            (mode.clamp(rlo + 1, rhi - 1), rhi - 1)
        }
        None => (0, CUSTOM_SUPPORT_CAP.min(rf.valid_range().1 - 1)),
    };

    let (floor, ceil) = match rf.beta() {
        Some(_) => {
            let (rlo, rhi) = rf.valid_range();
            (rlo + 1, rhi - 1)
        }
        None => (-cap, cap),
    };

    let mut lo = center;
    let mut hi = center;
    let peak = log_term(center)?;
    let mut terms = std::collections::VecDeque::from([1.0_f64]); // scaled by e^{peak}
    let mut sum = 1.0_f64;

    // Grow each side until the inside edge term and a geometric bound on the
    // outside tail are both below tail_tol/4 of the current mass. The measures
    // here are log-concave for monotone rates, so the local ratio at the edge
    // bounds all further ratios; for non-monotone tables the loop keeps
    // growing while terms still rise, and the cap converts non-convergence
    // into an explicit error below.
    let side_done = |t_edge: f64, t_next: f64, sum: f64| -> bool {
        let budget = tail_tol / 4.0 * sum;
        let ratio = if t_edge > 0.0 { t_next / t_edge } else { 0.0 };
        let tail_bound = if ratio < 1.0 {
            t_next / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        t_edge <= budget && tail_bound <= budget
    };
    loop {
        let mut grew = false;
        if hi < ceil {
            let t_next = (log_term(hi + 1)? - peak).exp();
            if !side_done(*terms.back().unwrap(), t_next, sum) {
                terms.push_back(t_next);
                sum += t_next;
                hi += 1;
                grew = true;
            }
        }
        if lo > floor {
            let t_next = (log_term(lo - 1)? - peak).exp();
            if !side_done(*terms.front().unwrap(), t_next, sum) {
                terms.push_front(t_next);
                sum += t_next;
                lo -= 1;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }

    // Convergence check: if growth stopped at a cap with edge terms still
    // above budget, the truncated sum is not trustworthy.
    let budget = tail_tol / 4.0 * sum;
    if !sum.is_finite()
        || terms.len() < 2
        || *terms.front().unwrap() > budget
        || *terms.back().unwrap() > budget
    {
        return Err(Error::MeasureDiverged { theta, cap });
    }

    let z_part = sum * peak.exp();
    let pmf: Vec<f64> = terms.iter().map(|t| t / sum).collect();
    Ok(SiteMeasure {
        rate: rf.clone(),
        theta,
        z_lo: lo,
        pmf,
        z_part,
        tail_tol,
    })
}

impl SiteMeasure {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rate_function(&self) -> &RateFunction {
        &self.rate
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Inclusive support `[z_lo, z_hi]`.
    pub fn support(&self) -> (i64, i64) {
        (self.z_lo, self.z_lo + self.pmf.len() as i64 - 1)
    }

    /// Truncated partition value `Z(θ)`.
    pub fn partition_value(&self) -> f64 {
        self.z_part
    }

    /// Probability of `z` (zero outside the truncated support).
    pub fn pmf(&self, z: i64) -> f64 {
        let idx = z - self.z_lo;
        if idx < 0 || idx as usize >= self.pmf.len() {
            0.0
        } else {
            self.pmf[idx as usize]
        }
    }

    /// Support points paired with probabilities.
    pub fn atoms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.z_lo + i as i64, *p))
    }

    /// Mean slope `u(θ) = E ω`.
    pub fn mean(&self) -> f64 {
        self.atoms().map(|(z, p)| z as f64 * p).sum()
    }

    /// Variance of the slope; equals `du/dθ`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms()
            .map(|(z, p)| {
                let d = z as f64 - m;
                d * d * p
            })
            .sum()
    }

    /// `(E r(ω), E r(-ω))`; equals `(e^θ, e^{-θ})` up to truncation.
    pub fn expected_rates(&self) -> Result<(f64, f64)> {
        let mut fwd = 0.0;
        let mut bwd = 0.0;
        for (z, p) in self.atoms() {
            fwd += self.rate.rate(z)? * p;
            bwd += self.rate.rate(-z)? * p;
        }
        Ok((fwd, bwd))
    }

    /// Inverse-CDF sample from the truncated support.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (z, p) in self.atoms() {
            acc += p;
            if u < acc {
                return z;
            }
        }
        self.support().1
    }

    /// Serializable description (rate spec, θ, tail tolerance).
    pub fn spec(&self) -> MeasureSpec {
        MeasureSpec {
            rate: self.rate.spec(),
            theta: self.theta,
            tail_tol: self.tail_tol,
        }
    }

    /// Write the pmf as CSV with columns `z,pmf`.
    pub fn write_pmf_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "z,pmf")?;
        for (z, p) in self.atoms() {
            writeln!(w, "{z},{p}")?;
        }
        Ok(())
    }
}

/// Invert the mean map: the `θ` with `E^{(θ)} ω = u`, found by bisection
/// (the mean is strictly increasing in `θ`).
pub fn theta_of_u(rf: &RateFunction, u: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
    }
    let tail = DEFAULT_TAIL_TOL.min(tol);
    let mean_at = |theta: f64| -> Result<f64> { Ok(build_measure(rf, theta, tail)?.mean()) };

    // Largest |θ| we bracket over: for exponential rates everything inside
    // the overflow guard is evaluable; for tabulated rates back off from θ̄
    // until the truncated sum converges.
    let theta_cap = if rf.theta_bar().is_finite() {
        let mut cap = 0.95 * rf.theta_bar();
        while cap > 1e-6 && mean_at(cap).is_err() {
            cap *= 0.9;
        }
        cap
    } else {
        let beta = rf.beta().expect("infinite theta_bar is exponential-only");
        beta * (rf.valid_range().1 as f64 - 64.0).max(1.0)
    };

    // Bracket the root.
    let (mut lo, mut hi) = match rf.beta() {
        // Shift identity: u(θ + β) = u(θ) + 1, so θ(u) ≈ β u.
        Some(beta) => (beta * (u - 1.5), beta * (u + 1.5)),
        None => (-theta_cap.min(1.0), theta_cap.min(1.0)),
    };
    lo = lo.clamp(-theta_cap, theta_cap);
    hi = hi.clamp(-theta_cap, theta_cap);
    let mut grow = 1.0;
    while lo > -theta_cap && mean_at(lo)? > u {
        lo = (lo - grow).max(-theta_cap);
        grow *= 2.0;
    }
    grow = 1.0;
    while hi < theta_cap && mean_at(hi)? < u {
        hi = (hi + grow).min(theta_cap);
        grow *= 2.0;
    }
    let (m_lo, m_hi) = (mean_at(lo)?, mean_at(hi)?);
    if u < m_lo || u > m_hi {
        return Err(Error::SlopeRange {
            u,
            lo: m_lo,
            hi: m_hi,
        });
    }

    // Bisection until the bracket is below tol or f64 stops making progress.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_at(mid)? < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < tol {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Max over the support of `|μ^{θ}(z-1) - μ^{θ+delta}(z)|`.
///
/// This vanishes exactly when the rate function is exponential and
/// `delta = β` — shifting the parameter by `β` shifts the measure by one
/// lattice site, and no other rate function or step size has that property.
pub fn shift_identity_residual(rf: &RateFunction, theta: f64, delta: f64) -> Result<f64> {
    let base = build_measure(rf, theta, DEFAULT_TAIL_TOL)?;
    let shifted = build_measure(rf, theta + delta, DEFAULT_TAIL_TOL)?;
    let (blo, bhi) = base.support();
    let (slo, shi) = shifted.support();
    let lo = (blo + 1).min(slo);
    let hi = (bhi + 1).max(shi);
    let mut worst = 0.0_f64;
    for z in lo..=hi {
        worst = worst.max((base.pmf(z - 1) - shifted.pmf(z)).abs());
    }
    Ok(worst)
}
