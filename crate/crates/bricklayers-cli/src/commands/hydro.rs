//! `hydro`: front tracking of piecewise-constant decreasing data, plus a
//! convexity scan of the flux.

use anyhow::Result;

use bricklayers::hydro::{convexity_check, front_track, write_events_csv};

use crate::config::ExperimentConfig;
use crate::report::OutDir;

pub fn run_cmd(cfg: &ExperimentConfig, out: &mut OutDir, quiet: bool) -> Result<u64> {
    let rf = cfg.rate.build()?;
    let h = &cfg.hydro;
    let profile = h.piecewise()?;

    let result = front_track(&rf, &profile, h.t_end)?;
    let mut w = out.create("hydro_events.csv")?;
    write_events_csv(&result.events, &mut w)?;
    let mut w = out.create("hydro_profile.csv")?;
    result.profile.write_csv(&mut w)?;

    let (lo, hi, step) = h.grid;
    let mut grid = Vec::new();
    let mut u = lo;
    while u <= hi + 1e-12 {
        grid.push(u);
        u += step;
    }
    let convexity = convexity_check(&rf, &grid)?;

    if !quiet {
        println!(
            "front tracking: {} merges by t = {}, {} shocks remain; flux convex: {} \
             (min second difference {:.3e})",
            result.events.len(),
            h.t_end,
            result.profile.breaks.len(),
            convexity.convex,
            convexity.min_second_difference
        );
    }
    Ok(result.events.len() as u64)
}
