//! `simulate`: replica-averaged Monte Carlo of the configured profile,
//! emitting the profile estimate CSV (and optionally one event log).

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bricklayers::mcsim::{estimate_profile, run, sample_initial, write_event_log_csv};

use crate::config::ExperimentConfig;
use crate::report::OutDir;

pub fn run_cmd(cfg: &ExperimentConfig, out: &mut OutDir, quiet: bool) -> Result<u64> {
    let rf = cfg.rate.build()?;
    let profile = cfg.profile.build(&rf)?;
    let params = cfg.simulate.sim_params()?;

    let est = estimate_profile(&rf, &profile, &params)?;
    let mut w = out.create("profile_estimate.csv")?;
    est.write_csv(&mut w)?;
    {
        use std::io::Write;
        let mut w = out.create("deposition_estimate.csv")?;
        writeln!(w, "bond,rate_mean,rate_stderr")?;
        for k in 0..est.bond_sites.len() {
            writeln!(
                w,
                "{},{},{}",
                est.bond_sites[k], est.deposition_mean[k], est.deposition_stderr[k]
            )?;
        }
    }
    if !quiet {
        println!(
            "simulated {} replicas to t = {} ({} events, {} boundary-active replicas)",
            params.replicas, params.t_end, est.total_events, est.boundary_active_replicas
        );
        if est.boundary_active_replicas > 0 {
            println!(
                "warning: events within 5 sites of the lattice edge in {} replicas; \
                 enlarge half_width if the window estimates matter",
                est.boundary_active_replicas
            );
        }
    }

    if cfg.simulate.log_events {
        // One extra logged replica on the untouched stream 0.
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut c = sample_initial(&rf, &profile, params.half_width, params.tail_tol, &mut rng)?;
        let stats = run(&rf, &profile, &mut c, &params, true, &mut rng)?;
        let mut w = out.create("events.csv")?;
        write_event_log_csv(&stats.event_log.unwrap_or_default(), &mut w)?;
    }
    Ok(est.total_events)
}
