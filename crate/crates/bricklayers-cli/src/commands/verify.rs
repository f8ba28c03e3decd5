//! `verify`: identity batteries over exponential and counterexample rates,
//! plus the measure-identity grid. Exit is nonzero unless every battery
//! passes — with the counterexample battery inverted (it must fail closure).

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use bricklayers::exactgen::{
    random_profile, run_identity_battery, summarize, write_rows_csv, BatterySummary, ExactEngine,
    IdentityRow,
};
use bricklayers::kernel::{
    build_measure, shift_identity_residual, ParameterProfile, RateFunction,
};

use crate::config::ExperimentConfig;
use crate::report::OutDir;

#[derive(Debug, Serialize)]
struct MeasureCheckRow {
    rate_id: String,
    theta: f64,
    check: String,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    batteries: Vec<BatterySummary>,
    passed: bool,
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutDir, quiet: bool) -> Result<bool> {
    let v = &cfg.verify;
    if v.profiles == 0 {
        anyhow::bail!("verify.profiles must be positive (empty profile battery is vacuous)");
    }
    if v.betas.is_empty() {
        anyhow::bail!("verify.betas must not be empty");
    }

    let mut all_rows: Vec<IdentityRow> = Vec::new();
    let mut exp_rows = 0usize;

    // Exponential batteries: randomized profiles per β.
    for (k, &beta) in v.betas.iter().enumerate() {
        let engine = ExactEngine::new(RateFunction::exponential(beta)?, v.tail_tol);
        let mut rng = ChaCha8Rng::seed_from_u64(v.seed.wrapping_add(k as u64));
        for p in 0..v.profiles {
            let profile = random_profile(&mut rng, beta);
            let rows = run_identity_battery(
                &engine,
                &[(format!("exp-b{beta}-p{p}"), profile)],
            )?;
            all_rows.extend(rows);
        }
        exp_rows = all_rows.len();
    }

    // Counterexample batteries: single-shock profiles on two tabulated rates.
    let customs: Vec<(&str, RateFunction, ParameterProfile)> = vec![
        (
            "linear",
            RateFunction::linear_counterexample(240),
            ParameterProfile::single_shock(1.0, 0.0, 0).with_beta(1.0),
        ),
        (
            "constant",
            RateFunction::constant_counterexample(240),
            ParameterProfile::single_shock(0.25, -0.25, 0).with_beta(0.5),
        ),
    ];
    let custom_start = all_rows.len();
    for (id, rf, profile) in &customs {
        let engine = ExactEngine::new(rf.clone(), v.tail_tol);
        let rows = run_identity_battery(&engine, &[(format!("custom-{id}"), profile.clone())])?;
        all_rows.extend(rows);
    }

    let mut batteries = vec![
        summarize(
            "argument_identity_exponential",
            all_rows[..exp_rows].iter().map(|r| &r.residual_argument),
            v.identity_tol,
            true,
        ),
        summarize(
            "closure_exponential",
            all_rows[..exp_rows].iter().map(|r| &r.residual_parameter),
            v.identity_tol,
            true,
        ),
        summarize(
            "argument_identity_custom",
            all_rows[custom_start..].iter().map(|r| &r.residual_argument),
            v.identity_tol,
            true,
        ),
        // Inverted: the closure must fail for non-exponential rates on the
        // coordinate function.
        summarize(
            "closure_counterexample",
            all_rows[custom_start..]
                .iter()
                .filter(|r| r.phi_id == "omega_0")
                .map(|r| &r.residual_parameter),
            v.counterexample_min,
            false,
        ),
    ];

    // Measure-identity grid.
    let mut measure_rows: Vec<MeasureCheckRow> = Vec::new();
    let mut worst_ratio = 0.0_f64;
    let mut worst_rate = 0.0_f64;
    let mut worst_gauss = 0.0_f64;
    let mut worst_shift_exp = 0.0_f64;
    let mut min_shift_custom = f64::INFINITY;
    for &beta in &v.betas {
        let rf = RateFunction::exponential(beta)?;
        for theta in [-1.2, -0.6, 0.0, 0.45, 0.9] {
            let m = build_measure(&rf, theta, v.tail_tol)?;
            let (lo, hi) = m.support();
            let mut ratio_resid = 0.0_f64;
            for z in (lo + 1)..hi {
                let fwd = theta.exp() * m.pmf(z - 1) / m.pmf(z);
                let r = rf.rate(z)?;
                ratio_resid = ratio_resid.max((fwd - r).abs() / r.max(1.0));
            }
            let (f, b) = m.expected_rates()?;
            let rate_resid = ((f - theta.exp()).abs() / theta.exp().max(1.0))
                .max((b - (-theta).exp()).abs() / (-theta).exp().max(1.0));
            let mode = theta / beta;
            let z_tilde: f64 = m
                .atoms()
                .map(|(z, _)| (-(beta / 2.0) * (z as f64 - mode).powi(2)).exp())
                .sum();
            let gauss_resid = m
                .atoms()
                .map(|(z, p)| {
                    (p - (-(beta / 2.0) * (z as f64 - mode).powi(2)).exp() / z_tilde).abs()
                })
                .fold(0.0_f64, f64::max);
            let shift = shift_identity_residual(&rf, theta, beta)?;
            worst_ratio = worst_ratio.max(ratio_resid);
            worst_rate = worst_rate.max(rate_resid);
            worst_gauss = worst_gauss.max(gauss_resid);
            worst_shift_exp = worst_shift_exp.max(shift);
            for (check, residual) in [
                ("ratio_identity", ratio_resid),
                ("expected_rates", rate_resid),
                ("discrete_normal", gauss_resid),
                ("shift_closure", shift),
            ] {
                measure_rows.push(MeasureCheckRow {
                    rate_id: format!("exp-b{beta}"),
                    theta,
                    check: check.to_string(),
                    residual,
                });
            }
        }
    }
    for (id, rf, thetas, deltas) in [
        (
            "linear",
            RateFunction::linear_counterexample(240),
            vec![-0.5, 0.0, 0.3],
            vec![0.25, 0.5, 1.0],
        ),
        (
            "constant",
            RateFunction::constant_counterexample(240),
            vec![-0.2, 0.0, 0.15],
            vec![0.2, 0.35],
        ),
    ] {
        for &theta in &thetas {
            for &delta in &deltas {
                let shift = shift_identity_residual(&rf, theta, delta)?;
                min_shift_custom = min_shift_custom.min(shift);
                measure_rows.push(MeasureCheckRow {
                    rate_id: format!("custom-{id}-d{delta}"),
                    theta,
                    check: "shift_closure".to_string(),
                    residual: shift,
                });
            }
        }
    }
    batteries.push(summarize(
        "measure_ratio_identities",
        [worst_ratio].iter(),
        1e-10,
        true,
    ));
    batteries.push(summarize(
        "measure_expected_rates",
        [worst_rate].iter(),
        10.0 * v.tail_tol,
        true,
    ));
    batteries.push(summarize(
        "measure_discrete_normal",
        [worst_gauss].iter(),
        1e-12,
        true,
    ));
    batteries.push(summarize(
        "measure_shift_exponential",
        [worst_shift_exp].iter(),
        1e-10,
        true,
    ));
    batteries.push(summarize(
        "measure_shift_counterexample",
        [min_shift_custom].iter(),
        v.counterexample_min,
        false,
    ));

    let passed = batteries.iter().all(|b| b.passed);
    if !quiet {
        for b in &batteries {
            let dir = if b.require_below { "<" } else { ">" };
            println!(
                "{}: {} ({} cases, decisive residual {:.3e} {} {:.3e})",
                b.name,
                if b.passed { "PASS" } else { "FAIL" },
                b.cases,
                b.decisive_residual,
                dir,
                b.threshold
            );
        }
    }

    let mut w = out.create("identities.csv")?;
    write_rows_csv(&all_rows, &mut w)?;
    let mut w = out.create("measure_identities.csv")?;
    {
        use std::io::Write;
        writeln!(w, "rate_id,theta,check,residual")?;
        for r in &measure_rows {
            writeln!(w, "{},{},{},{}", r.rate_id, r.theta, r.check, r.residual)?;
        }
    }
    out.write_json(
        "verify_summary.json",
        &VerifySummary {
            batteries,
            passed,
        },
    )?;
    Ok(passed)
}
