//! `walkers`: simulate the interacting shock walkers (and optionally solve
//! their exact master equation).

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bricklayers::walkers::{master_equation, simulate, WalkerConfig};

use crate::config::ExperimentConfig;
use crate::report::OutDir;

pub fn run_cmd(cfg: &ExperimentConfig, out: &mut OutDir, quiet: bool) -> Result<u64> {
    let w = &cfg.walkers;
    let cfg0 = WalkerConfig::new(w.positions.clone(), w.theta_left, w.beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(w.seed);
    let traj = simulate(&cfg0, w.t_end, &mut rng);
    let mut file = out.create("walkers_trajectory.csv")?;
    traj.write_csv(&mut file)?;
    let events = traj.times.len() as u64 - 1;
    if !quiet {
        let end = traj.configs.last().unwrap();
        println!(
            "walkers: {} events to t = {}, final positions {:?}",
            events,
            w.t_end,
            end.iter().map(|q| *q as f64 - 0.5).collect::<Vec<_>>()
        );
    }
    if w.master {
        let law = master_equation(&cfg0, w.t_end, None)?;
        let mut file = out.create("walkers_law.csv")?;
        law.write_csv(&mut file)?;
        if !quiet {
            println!(
                "master equation: {} states in window {:?}, leak {:.2e}",
                law.states.len(),
                law.window,
                law.leak
            );
        }
    }
    Ok(events)
}
