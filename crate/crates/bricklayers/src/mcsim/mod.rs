//! Event-driven continuous-time Monte Carlo of the full bricklayers'
//! dynamics on a finite lattice.
//!
//! The simulation is exact (Gillespie direct method): waiting times are
//! exponential in the total rate, the firing bond is chosen proportionally
//! to its rate through a partial-sum tree, and the move lays one brick on
//! that bond (`ω_i -> ω_i - 1`, `ω_{i+1} -> ω_{i+1} + 1`). Affected bond
//! rates are recomputed from the slopes rather than adjusted incrementally,
//! so floating-point drift cannot accumulate; a periodic resync verifies the
//! tree against a fresh sum.
//!
//! Boundaries are either `Frozen` (no bonds beyond the lattice — edge sites
//! slowly drain, so the lattice must be wide enough that the measurement
//! window is never influenced) or `Reservoir` (one extra bond per edge whose
//! missing neighbor is redrawn from its equilibrium measure at every rate
//! evaluation).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{build_measure, ParameterProfile, RateFunction, SiteMeasure};
use crate::util::ratetree::RateTree;
use crate::util::stats::mean_stderr;

/// Resync the partial-sum tree every this many events.
const RESYNC_INTERVAL: u64 = 1 << 20;

/// Boundary treatment of the finite lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Frozen,
    Reservoir,
}

/// Simulation parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimParams {
    /// Lattice half-width `L`: sites `-L..=L`.
    pub half_width: i64,
    pub boundary: Boundary,
    pub t_end: f64,
    pub seed: u64,
    pub replicas: usize,
    /// Measurement window (inclusive), strictly inside the lattice.
    pub window: (i64, i64),
    /// Slope safety band; `None` picks `ceil(40/β)` above the profile's
    /// extreme means (exponential kinds) or the rate table's capacity.
    pub omega_cap: Option<i64>,
    pub tail_tol: f64,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let l = self.half_width;
        if l < 2 {
            return Err(Error::invalid("half_width must be >= 2"));
        }
        let (wlo, whi) = self.window;
        if wlo > whi || wlo <= -l || whi >= l {
            return Err(Error::invalid(format!(
                "measurement window [{wlo}, {whi}] must lie strictly inside [-{l}, {l}]"
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::invalid("t_end must be >= 0"));
        }
        Ok(())
    }

    /// Resolve the slope cap for a given rate function and profile.
    pub fn resolve_omega_cap(&self, rf: &RateFunction, profile: &ParameterProfile) -> Result<i64> {
        let (zlo, zhi) = rf.valid_range();
        let capacity = zhi.min(-zlo) - 1;
        let cap = match self.omega_cap {
            Some(c) => c,
            None => match rf.beta() {
                Some(beta) => {
                    let mut extreme = 0.0_f64;
                    for theta in profile.distinct_values() {
                        extreme = extreme.max(build_measure(rf, theta, self.tail_tol)?.mean().abs());
                    }
                    (40.0 / beta).ceil() as i64 + extreme.ceil() as i64 + 1
                }
                None => capacity.min(100),
            },
        };
        if cap < 2 || cap > capacity {
            return Err(Error::invalid(format!(
                "omega cap {cap} outside the rate function's capacity [2, {capacity}]"
            )));
        }
        Ok(cap)
    }
}

/// Lattice state: slopes over sites `-L..=L` and brick counts per bond.
#[derive(Debug, Clone)]
pub struct Configuration {
    site_lo: i64,
    pub omega: Vec<i64>,
    /// Bricks laid per bond `(i, i+1)` for `i in -L-1 ..= L` since time 0;
    /// the outermost entries stay zero unless reservoir bonds are active.
    pub heights: Vec<i64>,
    pub time: f64,
    pub events: u64,
}

impl Configuration {
    pub fn site_range(&self) -> (i64, i64) {
        (self.site_lo, self.site_lo + self.omega.len() as i64 - 1)
    }

    pub fn omega_at(&self, site: i64) -> i64 {
        self.omega[(site - self.site_lo) as usize]
    }

    /// Height change of bond `(i, i+1)` since time zero.
    pub fn height_at(&self, bond: i64) -> i64 {
        self.heights[(bond - (self.site_lo - 1)) as usize]
    }

    /// Sum of slopes over the lattice.
    pub fn total_slope(&self) -> i64 {
        self.omega.iter().sum()
    }

    /// Exact integer identity tying slopes to laid bricks:
    /// `ω_i(t) - ω_i(0) = h_{i-1} - h_i`, and the event counter equals the
    /// total number of bricks.
    pub fn consistent_with(&self, initial: &Configuration) -> bool {
        if self.site_range() != initial.site_range() {
            return false;
        }
        let (lo, hi) = self.site_range();
        for i in lo..=hi {
            if self.omega_at(i) - initial.omega_at(i) != self.height_at(i - 1) - self.height_at(i)
            {
                return false;
            }
        }
        self.events == self.heights.iter().map(|&h| h as u64).sum::<u64>()
    }
}

/// Independent per-site draws from the profile's measures; heights zeroed.
pub fn sample_initial<R: Rng + ?Sized>(
    rf: &RateFunction,
    profile: &ParameterProfile,
    half_width: i64,
    tail_tol: f64,
    rng: &mut R,
) -> Result<Configuration> {
    let mut measures: Vec<(u64, SiteMeasure)> = Vec::new();
    let n_sites = (2 * half_width + 1) as usize;
    let mut omega = Vec::with_capacity(n_sites);
    for i in -half_width..=half_width {
        let theta = profile.theta_at(i);
        let key = theta.to_bits();
        let pos = match measures.iter().position(|(k, _)| *k == key) {
            Some(p) => p,
            None => {
                measures.push((key, build_measure(rf, theta, tail_tol)?));
                measures.len() - 1
            }
        };
        omega.push(measures[pos].1.sample(rng));
    }
    Ok(Configuration {
        site_lo: -half_width,
        omega,
        heights: vec![0; n_sites + 1],
        time: 0.0,
        events: 0,
    })
}

/// `r(ω_i) + r(-ω_{i+1})`: the deposition rate of bond `(i, i+1)`.
pub fn bond_rate(rf: &RateFunction, c: &Configuration, i: i64) -> Result<f64> {
    let (lo, hi) = c.site_range();
    if i < lo || i + 1 > hi {
        return Err(Error::invalid(format!("bond {i} outside lattice")));
    }
    Ok(rf.rate(c.omega_at(i))? + rf.rate(-c.omega_at(i + 1))?)
}

/// One logged deposition event.
#[derive(Debug, Clone, Copy)]
pub struct EventRecord {
    pub t: f64,
    /// Left site of the bond that fired.
    pub bond: i64,
    pub omega_left_after: i64,
    pub omega_right_after: i64,
}

/// Write an event log as CSV.
pub fn write_event_log_csv<W: std::io::Write>(
    events: &[EventRecord],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "t,bond,omega_left_after,omega_right_after")?;
    for e in events {
        writeln!(
            w,
            "{},{},{},{}",
            e.t, e.bond, e.omega_left_after, e.omega_right_after
        )?;
    }
    Ok(())
}

/// Counters accumulated during one run.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub events: u64,
    /// Events on bonds within 5 sites of either lattice edge.
    pub boundary_events: u64,
    /// Events per interior bond, indexed from bond `-L`.
    pub bond_event_counts: Vec<u64>,
    /// Worst absolute drift found by periodic partial-sum resyncs.
    pub max_resync_drift: f64,
    pub event_log: Option<Vec<EventRecord>>,
}

/// Exact event-driven simulation until `params.t_end`.
pub fn run<R: Rng + ?Sized>(
    rf: &RateFunction,
    profile: &ParameterProfile,
    cfg: &mut Configuration,
    params: &SimParams,
    log_events: bool,
    rng: &mut R,
) -> Result<RunStats> {
    params.validate()?;
    let cap = params.resolve_omega_cap(rf, profile)?;
    let table = rf.rate_table(-cap - 1, cap + 1)?;
    let (site_lo, site_hi) = cfg.site_range();
    let n_sites = cfg.omega.len();
    let n_interior = n_sites - 1;
    let reservoir = params.boundary == Boundary::Reservoir;

    for (k, &w) in cfg.omega.iter().enumerate() {
        if w.abs() > cap {
            return Err(Error::OmegaCapBreached {
                site: site_lo + k as i64,
                value: w,
                cap,
            });
        }
    }

    // Equilibrium measures feeding the reservoir bonds.
    let edge_measures = if reservoir {
        Some((
            build_measure(rf, profile.theta_at(site_lo - 1), params.tail_tol)?,
            build_measure(rf, profile.theta_at(site_hi + 1), params.tail_tol)?,
        ))
    } else {
        None
    };

    // Leaves: interior bonds 0..n_interior, then left/right virtual bonds.
    let n_leaves = n_interior + if reservoir { 2 } else { 0 };
    let left_leaf = n_interior;
    let right_leaf = n_interior + 1;
    let mut tree = RateTree::new(n_leaves);
    for k in 0..n_interior {
        tree.set(k, table.rate(cfg.omega[k]) + table.rate(-cfg.omega[k + 1]));
    }
    let refresh_virtual = |tree: &mut RateTree,
                           leaf: usize,
                           cfg: &Configuration,
                           rng: &mut R| {
        let (left_m, right_m) = edge_measures.as_ref().expect("reservoir measures");
        if leaf == left_leaf {
            let virt = left_m.sample(rng);
            tree.set(leaf, table.rate(virt.clamp(-cap, cap)) + table.rate(-cfg.omega[0]));
        } else {
            let virt = right_m.sample(rng);
            tree.set(
                leaf,
                table.rate(cfg.omega[n_sites - 1]) + table.rate(-virt.clamp(-cap, cap)),
            );
        }
    };
    if reservoir {
        refresh_virtual(&mut tree, left_leaf, cfg, rng);
        refresh_virtual(&mut tree, right_leaf, cfg, rng);
    }

    let mut stats = RunStats {
        events: 0,
        boundary_events: 0,
        bond_event_counts: vec![0; n_interior],
        max_resync_drift: 0.0,
        event_log: if log_events { Some(Vec::new()) } else { None },
    };

    loop {
        let total = tree.total();
        if total <= 0.0 {
            cfg.time = params.t_end;
            break;
        }
        let u: f64 = rng.gen();
        let dt = -(1.0 - u).ln() / total;
        if cfg.time + dt > params.t_end {
            cfg.time = params.t_end;
            break;
        }
        cfg.time += dt;
        let leaf = tree.select(rng.gen::<f64>() * total);

        // Apply the move and refresh the affected rates.
        if leaf < n_interior {
            let k = leaf;
            let (a, b) = (cfg.omega[k] - 1, cfg.omega[k + 1] + 1);
            if a.abs() > cap || b.abs() > cap {
                return Err(Error::OmegaCapBreached {
                    site: site_lo + if a.abs() > cap { k } else { k + 1 } as i64,
                    value: if a.abs() > cap { a } else { b },
                    cap,
                });
            }
            cfg.omega[k] = a;
            cfg.omega[k + 1] = b;
            cfg.heights[k + 1] += 1; // bond (site_lo + k, site_lo + k + 1)
            stats.bond_event_counts[k] += 1;
            if let Some(log) = stats.event_log.as_mut() {
                log.push(EventRecord {
                    t: cfg.time,
                    bond: site_lo + k as i64,
                    omega_left_after: a,
                    omega_right_after: b,
                });
            }
            if k < n_interior.min(5) || k + 5 >= n_interior {
                stats.boundary_events += 1;
            }
            for j in [k.wrapping_sub(1), k, k + 1] {
                if j < n_interior {
                    tree.set(j, table.rate(cfg.omega[j]) + table.rate(-cfg.omega[j + 1]));
                }
            }
            if reservoir {
                if k == 0 {
                    refresh_virtual(&mut tree, left_leaf, cfg, rng);
                }
                if k + 1 == n_sites - 1 {
                    refresh_virtual(&mut tree, right_leaf, cfg, rng);
                }
            }
        } else {
            // Virtual bonds move only the edge slope they touch.
            stats.boundary_events += 1;
            if leaf == left_leaf {
                let a = cfg.omega[0] + 1;
                if a.abs() > cap {
                    return Err(Error::OmegaCapBreached {
                        site: site_lo,
                        value: a,
                        cap,
                    });
                }
                cfg.omega[0] = a;
                cfg.heights[0] += 1;
                tree.set(0, table.rate(cfg.omega[0]) + table.rate(-cfg.omega[1]));
                refresh_virtual(&mut tree, left_leaf, cfg, rng);
            } else {
                let b = cfg.omega[n_sites - 1] - 1;
                if b.abs() > cap {
                    return Err(Error::OmegaCapBreached {
                        site: site_hi,
                        value: b,
                        cap,
                    });
                }
                cfg.omega[n_sites - 1] = b;
                cfg.heights[n_sites] += 1;
                tree.set(
                    n_interior - 1,
                    table.rate(cfg.omega[n_sites - 2]) + table.rate(-cfg.omega[n_sites - 1]),
                );
                refresh_virtual(&mut tree, right_leaf, cfg, rng);
            }
        }
        cfg.events += 1;
        stats.events += 1;
        if stats.events.is_multiple_of(RESYNC_INTERVAL) {
            let drift = tree.resync();
            stats.max_resync_drift = stats.max_resync_drift.max(drift);
        }
    }
    Ok(stats)
}

/// Replica-averaged slope profile and per-bond deposition rates.
#[derive(Debug, Clone)]
pub struct ProfileEstimate {
    pub sites: Vec<i64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Left sites of measured bonds (window bonds only).
    pub bond_sites: Vec<i64>,
    pub deposition_mean: Vec<f64>,
    pub deposition_stderr: Vec<f64>,
    /// Replicas that saw at least one event within 5 sites of an edge.
    pub boundary_active_replicas: usize,
    pub total_events: u64,
}

impl ProfileEstimate {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "site,mean,stderr")?;
        for ((s, m), e) in self.sites.iter().zip(&self.mean).zip(&self.stderr) {
            writeln!(w, "{s},{m},{e}")?;
        }
        Ok(())
    }
}

/// Estimate `E ω_i(t)` over the measurement window from independent
/// replicas, each with its own RNG stream of the base seed.
pub fn estimate_profile(
    rf: &RateFunction,
    profile: &ParameterProfile,
    params: &SimParams,
) -> Result<ProfileEstimate> {
    params.validate()?;
    if params.replicas < 2 {
        return Err(Error::invalid("estimate_profile needs at least 2 replicas"));
    }
    let (wlo, whi) = params.window;
    let n_window = (whi - wlo + 1) as usize;

    struct ReplicaOut {
        omega: Vec<i64>,
        bond_counts: Vec<u64>,
        boundary_active: bool,
        events: u64,
    }

    let outs: Vec<Result<ReplicaOut>> = (0..params.replicas)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(1 + rep as u64);
            let mut cfg = sample_initial(rf, profile, params.half_width, params.tail_tol, &mut rng)?;
            let stats = run(rf, profile, &mut cfg, params, false, &mut rng)?;
            let omega: Vec<i64> = (wlo..=whi).map(|i| cfg.omega_at(i)).collect();
            let bond_counts: Vec<u64> = (wlo..whi)
                .map(|i| stats.bond_event_counts[(i + params.half_width) as usize])
                .collect();
            Ok(ReplicaOut {
                omega,
                bond_counts,
                boundary_active: stats.boundary_events > 0,
                events: stats.events,
            })
        })
        .collect();

    let mut replicas = Vec::with_capacity(params.replicas);
    for o in outs {
        replicas.push(o?);
    }

    let mut mean = Vec::with_capacity(n_window);
    let mut stderr = Vec::with_capacity(n_window);
    for k in 0..n_window {
        let samples: Vec<f64> = replicas.iter().map(|r| r.omega[k] as f64).collect();
        let (m, se) = mean_stderr(&samples);
        mean.push(m);
        stderr.push(se);
    }
    let mut deposition_mean = Vec::with_capacity(n_window - 1);
    let mut deposition_stderr = Vec::with_capacity(n_window - 1);
    for k in 0..n_window - 1 {
        let samples: Vec<f64> = replicas
            .iter()
            .map(|r| r.bond_counts[k] as f64 / params.t_end)
            .collect();
        let (m, se) = mean_stderr(&samples);
        deposition_mean.push(m);
        deposition_stderr.push(se);
    }
    Ok(ProfileEstimate {
        sites: (wlo..=whi).collect(),
        mean,
        stderr,
        bond_sites: (wlo..whi).collect(),
        deposition_mean,
        deposition_stderr,
        boundary_active_replicas: replicas.iter().filter(|r| r.boundary_active).count(),
        total_events: replicas.iter().map(|r| r.events).sum(),
    })
}

#[cfg(test)]
mod tests;
