//! Randomized identity batteries and their report rows.
//!
//! Each case evaluates the time derivative of `E φ` three ways — through the
//! generator, through argument-shifted expectations, and through
//! parameter-shifted expectations — and records both residuals. The
//! argument-shift residual must vanish for every rate function; the
//! parameter-shift residual vanishes only for exponential rates, and the
//! counterexample battery checks that it stays away from zero for
//! non-exponential ones.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exactgen::cylinder::CylinderFunction;
use crate::exactgen::engine::ExactEngine;
use crate::kernel::{ParameterProfile, ProfileStep};

/// One identity evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub profile_id: String,
    pub phi_id: String,
    pub lhs: f64,
    pub rhs_argument: f64,
    pub rhs_parameter: f64,
    pub residual_argument: f64,
    pub residual_parameter: f64,
    /// Worst-case truncation budget for this case: 100 x tail tolerance x
    /// measured sup |Lφ| x enumerated width.
    pub tail_budget: f64,
}

/// Aggregate verdict of one battery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatterySummary {
    pub name: String,
    pub cases: usize,
    /// Worst (largest for `require_below`, smallest otherwise) residual seen.
    pub decisive_residual: f64,
    pub threshold: f64,
    /// Whether residuals must stay below the threshold (identity) or above
    /// it (counterexample).
    pub require_below: bool,
    pub passed: bool,
}

/// The standard test-function set at site `i`.
pub fn standard_test_functions(i: i64) -> Vec<(String, CylinderFunction)> {
    vec![
        (format!("omega_{i}"), CylinderFunction::coordinate(i)),
        (format!("omega_{i}_sq"), CylinderFunction::coordinate_squared(i)),
        (
            format!("omega_{i}_pair"),
            CylinderFunction::neighbor_product(i),
        ),
        (format!("ind_zero_{i}"), CylinderFunction::indicator_zero(i)),
    ]
}

/// A random profile with 1..=3 steps at sites in [-2, 2] and values in
/// [-1.2, 1.2]; non-monotone profiles arise naturally since values are
/// unordered.
pub fn random_profile(rng: &mut impl Rng, beta: f64) -> ParameterProfile {
    random_profile_in(rng, beta, 1.2)
}

/// Same, with `θ` values drawn from `[-amplitude, amplitude]` — needed for
/// tabulated rates whose `θ̄` is small.
pub fn random_profile_in(rng: &mut impl Rng, beta: f64, amplitude: f64) -> ParameterProfile {
    let n_steps = rng.gen_range(1..=3_usize);
    let mut sites: Vec<i64> = Vec::new();
    while sites.len() < n_steps {
        let s = rng.gen_range(-2..=2_i64);
        if !sites.contains(&s) {
            sites.push(s);
        }
    }
    sites.sort_unstable();
    let mut prev: f64 = rng.gen_range(-amplitude..amplitude);
    let theta_left = prev;
    let gap = amplitude / 24.0;
    let steps = sites
        .into_iter()
        .map(|site| {
            let mut v: f64 = rng.gen_range(-amplitude..amplitude);
            // Keep consecutive values visibly distinct so every step is a
            // genuine discontinuity.
            while (v - prev).abs() < gap {
                v = rng.gen_range(-amplitude..amplitude);
            }
            prev = v;
            ProfileStep { site, theta: v }
        })
        .collect();
    ParameterProfile::from_steps(theta_left, steps, Some(beta)).expect("sites are sorted")
}

/// Evaluate all three derivative forms for one `(profile, φ)` pair.
pub fn identity_row(
    engine: &ExactEngine,
    profile_id: &str,
    profile: &ParameterProfile,
    phi_id: &str,
    phi: &CylinderFunction,
) -> Result<IdentityRow> {
    let (lhs, tail_budget) = engine.ddt_detailed(profile, phi)?;
    let rhs_argument = engine.ddt_via_argument_shifts(profile, phi)?;
    let rhs_parameter = engine.ddt_via_parameter_shifts(profile, phi)?;
    Ok(IdentityRow {
        profile_id: profile_id.to_string(),
        phi_id: phi_id.to_string(),
        lhs,
        rhs_argument,
        rhs_parameter,
        residual_argument: (lhs - rhs_argument).abs(),
        residual_parameter: (lhs - rhs_parameter).abs(),
        tail_budget,
    })
}

/// Run a battery over profiles x the standard test functions at site 0.
pub fn run_identity_battery(
    engine: &ExactEngine,
    profiles: &[(String, ParameterProfile)],
) -> Result<Vec<IdentityRow>> {
    let phis = standard_test_functions(0);
    let mut rows = Vec::with_capacity(profiles.len() * phis.len());
    for (pid, profile) in profiles {
        for (fid, phi) in &phis {
            rows.push(identity_row(engine, pid, profile, fid, phi)?);
        }
    }
    Ok(rows)
}

/// Summarize rows into a verdict on one residual column.
pub fn summarize<'a>(
    name: &str,
    residuals: impl Iterator<Item = &'a f64>,
    threshold: f64,
    require_below: bool,
) -> BatterySummary {
    let mut decisive = if require_below {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    let mut cases = 0;
    for &r in residuals {
        cases += 1;
        decisive = if require_below {
            decisive.max(r)
        } else {
            decisive.min(r)
        };
    }
    let passed = cases > 0
        && if require_below {
            decisive < threshold
        } else {
            decisive > threshold
        };
    BatterySummary {
        name: name.to_string(),
        cases,
        decisive_residual: decisive,
        threshold,
        require_below,
        passed,
    }
}

/// CSV with one row per identity case.
pub fn write_rows_csv<W: std::io::Write>(rows: &[IdentityRow], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "profile_id,phi_id,lhs,rhs_argument,rhs_parameter,residual_argument,residual_parameter,tail_budget"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.profile_id,
            r.phi_id,
            r.lhs,
            r.rhs_argument,
            r.rhs_parameter,
            r.residual_argument,
            r.residual_parameter,
            r.tail_budget
        )?;
    }
    Ok(())
}
