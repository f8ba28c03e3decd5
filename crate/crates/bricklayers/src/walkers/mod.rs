//! Interacting random walkers representing one-sized shocks.
//!
//! A decreasing, `β`-quantized parameter profile with total drop `nβ` is a
//! multi-shock measure; its mixture weights evolve as `n` walkers on
//! half-integer positions. A walker sitting at `q - 1/2` marks a parameter
//! step at site `q`; positions are stored as those integers `q`. With `m`
//! walkers at a position and `k` walkers strictly to its left, some walker
//! leaves
//!
//! ```text
//! to the right with rate  e^{θ_left - kβ} (1 - e^{-mβ})
//! to the left with rate   e^{-θ_left + kβ} (e^{mβ} - 1),
//! ```
//!
//! which is also the sum of the corresponding single-walker rates — the only
//! way the walkers interact. Summed over positions these telescope, so the
//! total jump rate is configuration-independent: `e^{θ_left} - e^{θ_right}`
//! to the right and `e^{-θ_right} - e^{-θ_left}` to the left. The center of
//! mass is therefore an ordinary two-rate random walk with steps `±1/n`.

pub mod master;

pub use master::{master_equation, WalkerLaw};

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{ParameterProfile, ProfileStep};
use crate::util::ratetree::RateTree;

/// A multiset of `n >= 1` walker positions plus the left parameter value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WalkerConfig {
    /// Sorted parameter-step sites; walker `positions[j]` sits at
    /// `positions[j] - 1/2`.
    positions: Vec<i64>,
    theta_left_bits: u64,
    beta_bits: u64,
}

impl WalkerConfig {
    pub fn new(mut positions: Vec<i64>, theta_left: f64, beta: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("walker systems need n >= 1 walkers"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
        }
        if !theta_left.is_finite() {
            return Err(Error::invalid("theta_left must be finite"));
        }
        positions.sort_unstable();
        Ok(WalkerConfig {
            positions,
            theta_left_bits: theta_left.to_bits(),
            beta_bits: beta.to_bits(),
        })
    }

    /// Map a decreasing, `β`-quantized profile onto its walker multiset:
    /// each step down of `kβ` at site `q` contributes `k` walkers at `q`.
    /// Any other profile has no walker representation (some jump rate would
    /// be negative) and is rejected.
    pub fn from_profile(profile: &ParameterProfile) -> Result<Self> {
        let beta = profile
            .beta()
            .ok_or_else(|| Error::invalid("profile has no step quantum beta"))?;
        if !profile.is_decreasing() {
            return Err(Error::invalid(
                "profile is not decreasing: upward steps have no walker representation",
            ));
        }
        if !profile.is_beta_quantized(beta, 1e-9) {
            return Err(Error::invalid(
                "profile steps are not integer multiples of beta",
            ));
        }
        let mut positions = Vec::new();
        let mut prev = profile.theta_left();
        for s in profile.steps() {
            let k = ((prev - s.theta) / beta).round() as i64;
            for _ in 0..k {
                positions.push(s.site);
            }
            prev = s.theta;
        }
        if positions.is_empty() {
            return Err(Error::invalid("constant profile carries no shock"));
        }
        WalkerConfig::new(positions, profile.theta_left(), beta)
    }

    /// The parameter profile this walker multiset represents.
    pub fn to_profile(&self) -> ParameterProfile {
        let beta = self.beta();
        let mut steps: Vec<ProfileStep> = Vec::new();
        let mut drop = 0_i64;
        for group in self.occupied() {
            drop += group.count;
            steps.push(ProfileStep {
                site: group.site,
                theta: self.theta_left() - drop as f64 * beta,
            });
        }
        ParameterProfile::from_steps(self.theta_left(), steps, Some(beta))
            .expect("occupied() yields sorted sites")
            .with_beta(beta)
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn theta_left(&self) -> f64 {
        f64::from_bits(self.theta_left_bits)
    }

    pub fn theta_right(&self) -> f64 {
        self.theta_left() - self.n() as f64 * self.beta()
    }

    pub fn beta(&self) -> f64 {
        f64::from_bits(self.beta_bits)
    }

    /// Sorted step sites (one entry per walker, repeats allowed).
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// Walker positions as half-integers `q - 1/2`.
    pub fn half_positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.positions.iter().map(|&q| q as f64 - 0.5)
    }

    /// Occupied sites with multiplicities and left-counts, left to right.
    pub fn occupied(&self) -> Vec<OccupiedSite> {
        let mut groups: Vec<OccupiedSite> = Vec::new();
        let mut k = 0_i64;
        let mut idx = 0;
        while idx < self.positions.len() {
            let site = self.positions[idx];
            let mut count = 0;
            while idx < self.positions.len() && self.positions[idx] == site {
                count += 1;
                idx += 1;
            }
            groups.push(OccupiedSite {
                site,
                count,
                left_count: k,
            });
            k += count;
        }
        groups
    }

    /// Mean walker position (on the half-integer lattice).
    pub fn center_of_mass(&self) -> f64 {
        let sum: i64 = self.positions.iter().sum();
        sum as f64 / self.n() as f64 - 0.5
    }

    /// Distance between the rightmost and leftmost walkers.
    pub fn width(&self) -> i64 {
        self.positions.last().unwrap() - self.positions.first().unwrap()
    }

    /// Gap between the `m`-th and `m+1`-th walkers (1-indexed, left labeled).
    pub fn gap(&self, m: usize) -> Result<i64> {
        if m == 0 || m >= self.n() {
            return Err(Error::invalid(format!(
                "gap index m must be in 1..={}, got {m}",
                self.n() - 1
            )));
        }
        Ok(self.positions[m] - self.positions[m - 1])
    }
}

/// One occupied position of a walker multiset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OccupiedSite {
    pub site: i64,
    /// `m`: walkers at this position.
    pub count: i64,
    /// `k`: walkers strictly to the left.
    pub left_count: i64,
}

/// Departure rates `(right, left)` from an occupied position.
pub fn site_rates(cfg: &WalkerConfig, site: i64) -> Result<(f64, f64)> {
    let group = cfg
        .occupied()
        .into_iter()
        .find(|g| g.site == site)
        .ok_or(Error::UnoccupiedPosition { site })?;
    Ok(group_rates(cfg.theta_left(), cfg.beta(), &group))
}

fn group_rates(theta_left: f64, beta: f64, g: &OccupiedSite) -> (f64, f64) {
    let k = g.left_count as f64;
    let m = g.count as f64;
    let right = (theta_left - k * beta).exp() * (1.0 - (-m * beta).exp());
    let left = (-theta_left + k * beta).exp() * ((m * beta).exp() - 1.0);
    (right, left)
}

/// Configuration-independent total jump rates `(right, left)`.
pub fn total_rates(cfg: &WalkerConfig) -> (f64, f64) {
    let (tl, tr) = (cfg.theta_left(), cfg.theta_right());
    (tl.exp() - tr.exp(), (-tr).exp() - (-tl).exp())
}

/// One executed walker event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEvent {
    /// Exponential waiting time that elapsed before the jump.
    pub dt: f64,
    pub from: i64,
    pub to: i64,
}

/// Draw the next event without applying it: an occupied position is chosen
/// proportionally to its total departure rate, the direction by the rate
/// split, after an exponential waiting time in the total rate.
pub fn next_event<R: Rng + ?Sized>(cfg: &WalkerConfig, rng: &mut R) -> StepEvent {
    let groups = cfg.occupied();
    let rates: Vec<f64> = groups
        .iter()
        .map(|g| {
            let (r, l) = group_rates(cfg.theta_left(), cfg.beta(), g);
            r + l
        })
        .collect();
    let tree = RateTree::from_rates(&rates);
    let total = tree.total();
    let dt = exponential(rng, total);
    let chosen = tree.select(rng.gen::<f64>() * total);
    let g = groups[chosen];
    let (right, left) = group_rates(cfg.theta_left(), cfg.beta(), &g);
    let go_right = rng.gen::<f64>() * (right + left) < right;
    let to = if go_right { g.site + 1 } else { g.site - 1 };
    StepEvent {
        dt,
        from: g.site,
        to,
    }
}

/// Apply a drawn event: exactly one walker moves from `ev.from` to `ev.to`.
pub fn apply_event(cfg: &mut WalkerConfig, ev: &StepEvent) {
    let idx = cfg
        .positions
        .iter()
        .position(|&q| q == ev.from)
        .expect("event origin must be occupied");
    cfg.positions[idx] = ev.to;
    cfg.positions.sort_unstable();
}

/// Execute one event in place.
pub fn step<R: Rng + ?Sized>(cfg: &mut WalkerConfig, rng: &mut R) -> StepEvent {
    let ev = next_event(cfg, rng);
    apply_event(cfg, &ev);
    ev
}

fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// A recorded walker trajectory: positions after each event.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub configs: Vec<Vec<i64>>,
}

impl Trajectory {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,positions")?;
        for (t, cfg) in self.times.iter().zip(&self.configs) {
            let pos: Vec<String> = cfg.iter().map(|q| (*q as f64 - 0.5).to_string()).collect();
            writeln!(w, "{t},{}", pos.join(";"))?;
        }
        Ok(())
    }
}

/// Simulate to `t_end`, recording every event.
pub fn simulate<R: Rng + ?Sized>(cfg0: &WalkerConfig, t_end: f64, rng: &mut R) -> Trajectory {
    let mut cfg = cfg0.clone();
    let mut t = 0.0;
    let mut traj = Trajectory {
        times: vec![0.0],
        configs: vec![cfg.positions.clone()],
    };
    loop {
        let ev = step(&mut cfg, rng);
        t += ev.dt;
        if t > t_end {
            break;
        }
        traj.times.push(t);
        traj.configs.push(cfg.positions.clone());
    }
    traj
}

/// Simulate to `t_end` without recording; returns the final configuration.
pub fn run_until<R: Rng + ?Sized>(cfg0: &WalkerConfig, t_end: f64, rng: &mut R) -> WalkerConfig {
    let mut cfg = cfg0.clone();
    let mut t = 0.0;
    loop {
        let ev = next_event(&cfg, rng);
        t += ev.dt;
        if t > t_end {
            return cfg;
        }
        apply_event(&mut cfg, &ev);
    }
}

/// Rate bounds from the labeled-walker argument for the gap `η_m` between
/// the m-th and m+1-th walkers while it is positive: the gap shrinks at
/// least at `e^β (1-e^{-β}) (e^{θ_left-βm} + e^{-θ_left+βm})` and grows at
/// most at `(1-e^{-β}) (e^{θ_left-βm} + e^{-θ_left+βm})`; the ratio of the
/// bounds is `e^{-β} < 1`, which is what keeps shock widths tight.
#[derive(Debug, Clone, Copy)]
pub struct GapRateBounds {
    pub min_decrease_rate: f64,
    pub max_increase_rate: f64,
    pub gap: i64,
    /// Gap is zero: the shrink bound does not apply until they separate.
    pub at_contact: bool,
}

pub fn gap_bound_rates(cfg: &WalkerConfig, m: usize) -> Result<GapRateBounds> {
    let gap = cfg.gap(m)?;
    let beta = cfg.beta();
    let tl = cfg.theta_left();
    let scale = (tl - beta * m as f64).exp() + (-tl + beta * m as f64).exp();
    let factor = 1.0 - (-beta).exp();
    Ok(GapRateBounds {
        min_decrease_rate: beta.exp() * factor * scale,
        max_increase_rate: factor * scale,
        gap,
        at_contact: gap == 0,
    })
}
