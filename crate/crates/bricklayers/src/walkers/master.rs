//! Exact law of the walker system by uniformization on a truncated position
//! window.
//!
//! States are walker multisets inside `[lo, hi]`; moves that would cross the
//! window edges are clipped and reported as leak. With an auto-sized window
//! (`6 sqrt(total_rate t) + width` around the initial positions) the leak is
//! a Poisson-tail quantity; with an explicit window the clipped dynamics is
//! itself the model of interest — a chain with equilibrium-averaged edge
//! bonds induces exactly these clipped walkers on the positions adjacent to
//! the chain.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::util::ctmc::SparseCtmc;
use crate::walkers::WalkerConfig;

/// State-space cap for the exact solver.
pub const WALKER_STATE_LIMIT: usize = 100_000;

/// Walker-count cap: combinatorics beyond this exceed the state cap anyway.
pub const WALKER_COUNT_LIMIT: usize = 4;

/// Law over walker multisets at a fixed time.
#[derive(Debug, Clone)]
pub struct WalkerLaw {
    /// Sorted position multisets, in enumeration order.
    pub states: Vec<Vec<i64>>,
    pub probs: Vec<f64>,
    /// Integrated clipped-rate mass at the window edges.
    pub leak: f64,
    pub window: (i64, i64),
}

impl WalkerLaw {
    pub fn probability_of(&self, positions: &[i64]) -> f64 {
        self.states
            .iter()
            .position(|s| s == positions)
            .map_or(0.0, |i| self.probs[i])
    }

    /// Marginal law of a statistic of the multiset (e.g. sum of positions).
    pub fn marginal<K: std::hash::Hash + Eq, F: Fn(&[i64]) -> K>(&self, f: F) -> HashMap<K, f64> {
        let mut out = HashMap::new();
        for (s, p) in self.states.iter().zip(&self.probs) {
            *out.entry(f(s)).or_insert(0.0) += *p;
        }
        out
    }

    /// CSV rows `probability,positions` (half-integer positions joined by `;`).
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "probability,positions")?;
        for (s, p) in self.states.iter().zip(&self.probs) {
            if *p > 0.0 {
                let pos: Vec<String> =
                    s.iter().map(|q| (*q as f64 - 0.5).to_string()).collect();
                writeln!(w, "{p},{}", pos.join(";"))?;
            }
        }
        Ok(())
    }
}

/// Exact walker law at time `t`. `window` clips positions to an inclusive
/// range; `None` auto-sizes it from the total jump rate.
pub fn master_equation(
    cfg0: &WalkerConfig,
    t: f64,
    window: Option<(i64, i64)>,
) -> Result<WalkerLaw> {
    let n = cfg0.n();
    if n > WALKER_COUNT_LIMIT {
        return Err(Error::invalid(format!(
            "exact walker law supports n <= {WALKER_COUNT_LIMIT}, got {n}"
        )));
    }
    let (lo, hi) = match window {
        Some(w) => w,
        None => {
            let (r, l) = super::total_rates(cfg0);
            let spread = (6.0 * ((r + l) * t).sqrt()).ceil() as i64 + 2;
            (
                cfg0.positions().first().unwrap() - spread,
                cfg0.positions().last().unwrap() + spread,
            )
        }
    };
    if lo > *cfg0.positions().first().unwrap() || hi < *cfg0.positions().last().unwrap() {
        return Err(Error::invalid(
            "walker window must contain the initial positions",
        ));
    }

    // Multisets of size n over w positions: C(w + n - 1, n).
    let w = (hi - lo + 1) as u128;
    let mut count: u128 = 1;
    for j in 1..=n as u128 {
        count = count * (w + j - 1) / j;
    }
    if count > WALKER_STATE_LIMIT as u128 {
        return Err(Error::StateSpaceTooLarge {
            size: count.min(usize::MAX as u128) as usize,
            limit: WALKER_STATE_LIMIT,
        });
    }

    // Enumerate sorted n-multisets of [lo, hi].
    let mut states: Vec<Vec<i64>> = Vec::with_capacity(count as usize);
    let mut stack = vec![lo; n];
    enumerate(&mut states, &mut stack, 0, lo, hi);
    debug_assert_eq!(states.len() as u128, count);
    let index: HashMap<Vec<i64>, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();

    let mut gen = SparseCtmc::new(states.len());
    for (i, s) in states.iter().enumerate() {
        let cfg = WalkerConfig::new(s.clone(), cfg0.theta_left(), cfg0.beta())
            .expect("enumerated states are non-empty");
        for g in cfg.occupied() {
            let (right, left) = super::site_rates(&cfg, g.site).expect("occupied");
            for (rate, to) in [(right, g.site + 1), (left, g.site - 1)] {
                if to < lo || to > hi {
                    gen.add_blocked(i, rate);
                } else {
                    let mut target = s.clone();
                    let idx = target.iter().position(|&q| q == g.site).unwrap();
                    target[idx] = to;
                    target.sort_unstable();
                    gen.add_transition(i, index[&target], rate);
                }
            }
        }
    }

    let mut p0 = vec![0.0; states.len()];
    p0[index[cfg0.positions()]] = 1.0;
    let law = gen.evolve(&p0, t);
    Ok(WalkerLaw {
        states,
        probs: law.probs,
        leak: law.leak,
        window: (lo, hi),
    })
}

fn enumerate(out: &mut Vec<Vec<i64>>, stack: &mut Vec<i64>, depth: usize, min: i64, hi: i64) {
    if depth == stack.len() {
        out.push(stack.clone());
        return;
    }
    for q in min..=hi {
        stack[depth] = q;
        enumerate(out, stack, depth + 1, q, hi);
    }
}
