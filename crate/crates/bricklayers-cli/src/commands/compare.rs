//! `compare`: Monte Carlo mean profile against the walker-mixture
//! prediction, with per-site z-scores and a multiplicity-corrected verdict.

use anyhow::Result;
use serde::Serialize;

use bricklayers::compare::{predicted_profile, z_compare, ZComparison};
use bricklayers::mcsim::{estimate_profile, Boundary, SimParams};
use bricklayers::walkers::WalkerConfig;

use crate::config::ExperimentConfig;
use crate::report::OutDir;

#[derive(Debug, Serialize)]
struct CompareSummary {
    comparison: ZComparison,
    walker_leak: f64,
    total_events: u64,
}

pub fn run_cmd(cfg: &ExperimentConfig, out: &mut OutDir, quiet: bool) -> Result<(bool, u64)> {
    let rf = cfg.rate.build()?;
    let profile = cfg.profile.build(&rf)?;
    let c = &cfg.compare;
    let params = SimParams {
        half_width: c.half_width,
        boundary: Boundary::Frozen,
        t_end: c.t_end,
        seed: c.seed,
        replicas: c.replicas,
        window: c.window,
        omega_cap: None,
        tail_tol: c.tail_tol,
    };
    params.validate()?;

    // The mixture prediction needs the walker representation: decreasing,
    // β-quantized profiles only.
    let walker0 = WalkerConfig::from_profile(&profile)?;
    let est = estimate_profile(&rf, &profile, &params)?;
    let pred = predicted_profile(&rf, &walker0, c.t_end, c.window, c.tail_tol)?;
    let cmp = z_compare(&est, &pred, c.z_base)?;

    {
        use std::io::Write;
        let mut w = out.create("compare.csv")?;
        writeln!(w, "site,estimated,stderr,predicted,z")?;
        for k in 0..cmp.sites.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                cmp.sites[k], est.mean[k], est.stderr[k], pred.mean[k], cmp.z[k]
            )?;
        }
    }
    let passed = cmp.passed;
    if !quiet {
        println!(
            "compare: max |z| = {:.2} vs threshold {:.2} over {} sites -> {}",
            cmp.max_abs_z,
            cmp.z_crit,
            cmp.sites.len(),
            if passed { "PASS" } else { "FAIL" }
        );
    }
    out.write_json(
        "compare_summary.json",
        &CompareSummary {
            comparison: cmp,
            walker_leak: pred.walker_leak,
            total_events: est.total_events,
        },
    )?;
    Ok((passed, est.total_events))
}
