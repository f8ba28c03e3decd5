//! Macroscopic description: flux, Rankine-Hugoniot speeds, and exact
//! event-driven front tracking for piecewise-constant decreasing data.
//!
//! The flux at slope density `u` is `J(u) = E^{θ(u)}(r(ω) + r(-ω))`, which
//! the measure identities collapse to `2 cosh θ(u)`; it is strictly convex
//! in `u` for attractive rates, so decreasing data evolves by shocks that
//! move at speed `s = (J(u_l) - J(u_r)) / (u_l - u_r)` and merge when they
//! collide. Front tracking is exact for this data class: positions move
//! linearly between merge events, and collision times solve linear
//! equations.

use crate::error::{Error, Result};
use crate::kernel::{build_measure, theta_of_u, RateFunction};

/// Tail tolerance for flux evaluations. Merge times are compared at 1e-9
/// and post-merge speeds at 1e-12, so the flux must be good to ~1e-13;
/// truncated sums at this tail plus full bisection in `theta_of_u` leave
/// errors near 1e-14.
pub const HYDRO_TAIL_TOL: f64 = 1e-15;

/// Root tolerance for `theta_of_u` used by flux evaluations.
pub const HYDRO_THETA_TOL: f64 = 1e-15;

/// Piecewise-constant decreasing slope profile: `u_left` left of the first
/// breakpoint, and `u` the value to the right of each breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseProfile {
    pub u_left: f64,
    /// `(x, u right of x)`, strictly increasing in `x`, strictly decreasing
    /// in `u`.
    pub breaks: Vec<(f64, f64)>,
}

impl PiecewiseProfile {
    pub fn new(u_left: f64, breaks: Vec<(f64, f64)>) -> Result<Self> {
        if breaks.is_empty() {
            return Err(Error::invalid("front tracking needs at least one shock"));
        }
        let mut prev_x = f64::NEG_INFINITY;
        let mut prev_u = u_left;
        for &(x, u) in &breaks {
            if x <= prev_x {
                return Err(Error::invalid("breakpoints must have increasing x"));
            }
            if u >= prev_u {
                return Err(Error::invalid(format!(
                    "u values must strictly decrease (upward shocks are not stable): \
                     {prev_u} -> {u}"
                )));
            }
            prev_x = x;
            prev_u = u;
        }
        Ok(PiecewiseProfile { u_left, breaks })
    }

    pub fn u_right(&self) -> f64 {
        self.breaks.last().map_or(self.u_left, |b| b.1)
    }

    /// `u(x)` by scanning the breakpoints.
    pub fn value_at(&self, x: f64) -> f64 {
        let mut u = self.u_left;
        for &(bx, bu) in &self.breaks {
            if x >= bx {
                u = bu;
            } else {
                break;
            }
        }
        u
    }

    /// `Σ_k (u_{k-1} - u_k) x_k`: the tracked region's area integral
    /// `∫ (u - u_right) dx` up to a constant, so merges must preserve it.
    pub fn area_moment(&self) -> f64 {
        let mut prev = self.u_left;
        let mut acc = 0.0;
        for &(x, u) in &self.breaks {
            acc += (prev - u) * x;
            prev = u;
        }
        acc
    }

    /// Snapshot CSV with columns `x,u` (one row per breakpoint, plus fills).
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,u")?;
        let first = self.breaks.first().unwrap().0;
        writeln!(w, "{},{}", first - 1.0, self.u_left)?;
        for &(x, u) in &self.breaks {
            writeln!(w, "{x},{u}")?;
        }
        Ok(())
    }
}

/// `J(u) = E^{θ(u)}(r(ω) + r(-ω))`, evaluated through the truncated
/// expectation (the defining route; it agrees with `2 cosh θ(u)` for any
/// rate satisfying the pairing constraint).
pub fn flux(rf: &RateFunction, u: f64) -> Result<f64> {
    let theta = theta_of_u(rf, u, HYDRO_THETA_TOL)?;
    let m = build_measure(rf, theta, HYDRO_TAIL_TOL)?;
    let (fwd, bwd) = m.expected_rates()?;
    Ok(fwd + bwd)
}

/// Rankine-Hugoniot speed of a shock between `u_left > u_right`.
pub fn rh_speed(rf: &RateFunction, u_left: f64, u_right: f64) -> Result<f64> {
    if !(u_left > u_right) {
        return Err(Error::invalid(format!(
            "rh_speed needs u_left > u_right, got {u_left} <= {u_right}"
        )));
    }
    Ok((flux(rf, u_left)? - flux(rf, u_right)?) / (u_left - u_right))
}

/// Convexity scan of the flux over a grid.
#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub convex: bool,
    pub min_second_difference: f64,
}

pub fn convexity_check(rf: &RateFunction, grid: &[f64]) -> Result<ConvexityReport> {
    if grid.len() < 3 {
        return Err(Error::invalid("convexity grid needs at least 3 points"));
    }
    let j: Vec<f64> = grid.iter().map(|&u| flux(rf, u)).collect::<Result<_>>()?;
    let mut min_dd = f64::INFINITY;
    for k in 1..grid.len() - 1 {
        let dd = j[k + 1] - 2.0 * j[k] + j[k - 1];
        min_dd = min_dd.min(dd);
    }
    Ok(ConvexityReport {
        convex: min_dd > 0.0,
        min_second_difference: min_dd,
    })
}

/// One merge event during front tracking.
#[derive(Debug, Clone)]
pub struct MergeEvent {
    pub t: f64,
    pub x: f64,
    /// Slope values to the left and right of the merged shock.
    pub u_left: f64,
    pub u_right: f64,
    /// Ids (assigned at construction, left to right) of merged shocks.
    pub merged: Vec<usize>,
    /// Area moment just before and just after the splice; equal by
    /// construction.
    pub area_before: f64,
    pub area_after: f64,
}

/// Front-tracking outcome.
#[derive(Debug, Clone)]
pub struct FrontTrackResult {
    pub events: Vec<MergeEvent>,
    pub profile: PiecewiseProfile,
    /// Speeds of the surviving shocks, left to right.
    pub speeds: Vec<f64>,
    pub t_end: f64,
}

pub fn write_events_csv<W: std::io::Write>(
    events: &[MergeEvent],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "t,x,u_left,u_right,merged_ids")?;
    for e in events {
        let ids: Vec<String> = e.merged.iter().map(|i| i.to_string()).collect();
        writeln!(w, "{},{},{},{},{}", e.t, e.x, e.u_left, e.u_right, ids.join(";"))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Shock {
    x: f64,
    u_left: f64,
    u_right: f64,
    speed: f64,
    ids: Vec<usize>,
}

/// Track shocks of a decreasing piecewise-constant profile until `t_end`:
/// every shock moves at its Rankine-Hugoniot speed, and the earliest
/// collision merges the colliding group into one shock (ties merge all
/// co-located shocks in one event).
pub fn front_track(
    rf: &RateFunction,
    profile: &PiecewiseProfile,
    t_end: f64,
) -> Result<FrontTrackResult> {
    if !(t_end >= 0.0) {
        return Err(Error::invalid("t_end must be >= 0"));
    }
    let mut shocks: Vec<Shock> = Vec::with_capacity(profile.breaks.len());
    let mut prev_u = profile.u_left;
    for (id, &(x, u)) in profile.breaks.iter().enumerate() {
        shocks.push(Shock {
            x,
            u_left: prev_u,
            u_right: u,
            speed: rh_speed(rf, prev_u, u)?,
            ids: vec![id],
        });
        prev_u = u;
    }

    let mut t = 0.0;
    let mut events = Vec::new();
    while shocks.len() > 1 {
        // Earliest pairwise collision among adjacent shocks.
        let mut tau_min = f64::INFINITY;
        for k in 0..shocks.len() - 1 {
            let ds = shocks[k].speed - shocks[k + 1].speed;
            if ds > 0.0 {
                let tau = (shocks[k + 1].x - shocks[k].x) / ds;
                if tau < tau_min {
                    tau_min = tau;
                }
            }
        }
        if !tau_min.is_finite() || t + tau_min > t_end {
            break;
        }
        // Advance to the collision and snap colliding pairs to a common
        // coordinate so the splice is exact.
        for s in &mut shocks {
            s.x += s.speed * tau_min;
        }
        t += tau_min;
        let colliding: Vec<bool> = (0..shocks.len() - 1)
            .map(|k| {
                let ds = shocks[k].speed - shocks[k + 1].speed;
                ds > 0.0 && {
                    let gap = shocks[k + 1].x - shocks[k].x;
                    gap.abs() <= 1e-12 * (1.0 + shocks[k].x.abs())
                }
            })
            .collect();
        for (k, hit) in colliding.iter().enumerate() {
            if *hit {
                let x = shocks[k].x;
                shocks[k + 1].x = x;
            }
        }

        let area_before = area_moment_of(&shocks);
        // Merge maximal runs of co-located shocks.
        let mut merged: Vec<Shock> = Vec::with_capacity(shocks.len());
        let mut iter = shocks.into_iter().peekable();
        let mut event_groups: Vec<Shock> = Vec::new();
        while let Some(mut s) = iter.next() {
            let mut was_merge = false;
            while let Some(nxt) = iter.peek() {
                if nxt.x == s.x {
                    let nxt = iter.next().unwrap();
                    s.u_right = nxt.u_right;
                    s.ids.extend(nxt.ids);
                    was_merge = true;
                } else {
                    break;
                }
            }
            if was_merge {
                s.speed = rh_speed(rf, s.u_left, s.u_right)?;
                event_groups.push(s.clone());
            }
            merged.push(s);
        }
        shocks = merged;
        let area_after = area_moment_of(&shocks);
        for g in event_groups {
            events.push(MergeEvent {
                t,
                x: g.x,
                u_left: g.u_left,
                u_right: g.u_right,
                merged: g.ids,
                area_before,
                area_after,
            });
        }
    }

    // Drift the survivors to t_end.
    let remaining = t_end - t;
    for s in &mut shocks {
        s.x += s.speed * remaining;
    }
    let profile_end = PiecewiseProfile::new(
        profile.u_left,
        shocks.iter().map(|s| (s.x, s.u_right)).collect(),
    )?;
    Ok(FrontTrackResult {
        events,
        speeds: shocks.iter().map(|s| s.speed).collect(),
        profile: profile_end,
        t_end,
    })
}

fn area_moment_of(shocks: &[Shock]) -> f64 {
    shocks.iter().map(|s| (s.u_left - s.u_right) * s.x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf1() -> RateFunction {
        RateFunction::exponential(1.0).unwrap()
    }

    #[test]
    fn flux_values() {
        let rf = rf1();
        // u = 0: θ = 0, J = 2.
        assert!((flux(&rf, 0.0).unwrap() - 2.0).abs() < 1e-12);
        // u = 1: θ = 1 by the shift identity, J = e + 1/e.
        let j1 = flux(&rf, 1.0).unwrap();
        assert!((j1 - (1.0_f64.exp() + (-1.0_f64).exp())).abs() < 1e-12, "{j1}");
        // Agreement with 2 cosh θ(u) along a grid.
        for u in [-1.5, -0.4, 0.3, 0.9, 2.0] {
            let theta = theta_of_u(&rf, u, HYDRO_THETA_TOL).unwrap();
            assert!((flux(&rf, u).unwrap() - 2.0 * theta.cosh()).abs() < 1e-12);
        }
        // Even in u for the symmetric exponential family.
        for u in [0.25, 1.0, 1.75] {
            assert!((flux(&rf, u).unwrap() - flux(&rf, -u).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn rh_speed_values_and_bounds() {
        let rf = rf1();
        // Symmetric size-2 shock: zero speed.
        assert!(rh_speed(&rf, 1.0, -1.0).unwrap().abs() < 1e-12);
        // u: 1 -> 0 moves at e + 1/e - 2.
        let s = rh_speed(&rf, 1.0, 0.0).unwrap();
        assert!((s - (1.0_f64.exp() + (-1.0_f64).exp() - 2.0)).abs() < 1e-12);
        // Size-1 shock speed equals the lone-walker drift.
        let (tl, tr) = (0.8, -0.2);
        let u_l = build_measure(&rf, tl, HYDRO_TAIL_TOL).unwrap().mean();
        let u_r = build_measure(&rf, tr, HYDRO_TAIL_TOL).unwrap().mean();
        assert!((u_l - u_r - 1.0).abs() < 1e-10);
        let drift = (tl.exp() - tr.exp()) - ((-tr).exp() - (-tl).exp());
        assert!((rh_speed(&rf, u_l, u_r).unwrap() - drift).abs() < 1e-10);
        // Degenerate arguments rejected.
        assert!(rh_speed(&rf, 0.5, 0.5).is_err());
        // Mean-value property: s strictly between J'(u_r) and J'(u_l).
        let h = 1e-6;
        let jp = |u: f64| (flux(&rf, u + h).unwrap() - flux(&rf, u - h).unwrap()) / (2.0 * h);
        let s = rh_speed(&rf, 1.3, 0.2).unwrap();
        assert!(jp(0.2) < s && s < jp(1.3));
    }

    /// A merged shock of integer size n moves at the drift of the n-walker
    /// center of mass: (2cosh θ(u_l) - 2cosh θ(u_r)) / n.
    #[test]
    fn merged_shock_speed_equals_walker_drift() {
        let rf = rf1();
        let n = 2;
        let cfg = crate::walkers::WalkerConfig::new(vec![0; n], 2.0, 1.0).unwrap();
        let (right, left) = crate::walkers::total_rates(&cfg);
        let drift = (right - left) / n as f64;
        // u(θ = 2) = 2 and u(θ = 0) = 0 for β = 1.
        let s = rh_speed(&rf, 2.0, 0.0).unwrap();
        assert!((s - drift).abs() < 1e-10, "speed {s} vs drift {drift}");
    }

    #[test]
    fn convexity_on_grid() {
        let rf = rf1();
        let grid: Vec<f64> = (-12..=12).map(|k| k as f64 * 0.25).collect();
        let report = convexity_check(&rf, &grid).unwrap();
        assert!(report.convex);
        assert!(report.min_second_difference > 0.0);
        // The second difference at the center matches direct evaluation.
        let j = |u: f64| flux(&rf, u).unwrap();
        let dd = j(0.25) - 2.0 * j(0.0) + j(-0.25);
        assert!(dd >= report.min_second_difference - 1e-12);
    }

    #[test]
    fn single_shock_moves_linearly() {
        let rf = rf1();
        let p = PiecewiseProfile::new(1.0, vec![(0.0, 0.0)]).unwrap();
        let r = front_track(&rf, &p, 2.5).unwrap();
        assert!(r.events.is_empty());
        let s = rh_speed(&rf, 1.0, 0.0).unwrap();
        assert!((r.profile.breaks[0].0 - 2.5 * s).abs() < 1e-12);
    }

    /// The two-shock merge: shocks 2->1 at x=0 and 1->0 at x=1 collide at
    /// t* = 1 / (2cosh2 - 4cosh1 + 2) and continue as one shock 2->0 with
    /// speed (2cosh2 - 2)/2.
    #[test]
    fn two_shock_merge_example() {
        let rf = rf1();
        let p = PiecewiseProfile::new(2.0, vec![(0.0, 1.0), (1.0, 0.0)]).unwrap();
        let r = front_track(&rf, &p, 1.0).unwrap();
        assert_eq!(r.events.len(), 1);
        let e = &r.events[0];
        let t_star = 1.0 / (2.0 * 2.0_f64.cosh() - 4.0 * 1.0_f64.cosh() + 2.0);
        assert!((e.t - t_star).abs() < 1e-9, "t* = {} vs {t_star}", e.t);
        assert_eq!(e.merged, vec![0, 1]);
        assert_eq!(r.profile.breaks.len(), 1);
        let post_speed = (2.0 * 2.0_f64.cosh() - 2.0) / 2.0;
        assert!(
            (r.speeds[0] - post_speed).abs() < 1e-12,
            "post speed {} vs {post_speed}",
            r.speeds[0]
        );
        assert_eq!(e.area_before, e.area_after, "splice must conserve area");
    }

    #[test]
    fn triple_tie_merges_in_one_event() {
        let rf = rf1();
        // Three shocks engineered to collide simultaneously at x by
        // symmetry: speeds s(3,2) > s(2,1)... use symmetric data around 1:
        // shocks 2->1, 1->-1, -1->-2 at positions chosen so outer shocks
        // reach the middle at the same time (even flux makes outer speeds
        // opposite and the middle shock static).
        let s_out = rh_speed(&rf, 2.0, 1.0).unwrap();
        let p = PiecewiseProfile::new(
            2.0,
            vec![(-s_out, 1.0), (0.0, -1.0), (s_out, -2.0)],
        )
        .unwrap();
        let r = front_track(&rf, &p, 2.0).unwrap();
        assert_eq!(r.events.len(), 1, "events: {:?}", r.events);
        assert_eq!(r.events[0].merged, vec![0, 1, 2]);
        assert_eq!(r.profile.breaks.len(), 1);
        assert!((r.events[0].t - 1.0).abs() < 1e-9);
        assert_eq!(r.events[0].area_before, r.events[0].area_after);
    }

    #[test]
    fn cascade_conserves_area_per_event() {
        let rf = rf1();
        let p = PiecewiseProfile::new(
            2.0,
            vec![(0.0, 1.2), (0.4, 0.3), (1.1, -0.8), (1.9, -2.0)],
        )
        .unwrap();
        let r = front_track(&rf, &p, 50.0).unwrap();
        assert_eq!(r.profile.breaks.len(), 1, "everything merges eventually");
        let last = r.events.last().unwrap();
        assert_eq!(last.merged.len(), 4, "final shock carries all ids");
        for e in &r.events {
            assert!(
                (e.area_before - e.area_after).abs() <= 1e-12 * (1.0 + e.area_before.abs()),
                "area changed at t = {}: {} -> {}",
                e.t,
                e.area_before,
                e.area_after
            );
        }
        // Speed ordering before any merge: left faster than right iff they
        // collide; after all merges a single stable shock remains.
        assert!(r.speeds.len() == 1);
    }

    #[test]
    fn rejects_non_decreasing_data() {
        assert!(PiecewiseProfile::new(0.0, vec![(0.0, 1.0)]).is_err());
        assert!(PiecewiseProfile::new(2.0, vec![(0.0, 1.0), (1.0, 1.0)]).is_err());
        assert!(PiecewiseProfile::new(2.0, vec![(0.0, 1.0), (0.0, 0.0)]).is_err());
    }
}
