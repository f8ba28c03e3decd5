//! Property tests for the structural invariants: the rate pairing
//! constraint, measure normalization and ratio identities, monotonicity of
//! the mean map, walker rate identities, and partial-sum tree consistency.

use proptest::prelude::*;

use bricklayers::kernel::{build_measure, theta_of_u, RateFunction};
use bricklayers::util::ratetree::RateTree;
use bricklayers::walkers::{site_rates, total_rates, WalkerConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// r(z) r(-z+1) = 1 for every constructed rate function.
    #[test]
    fn pairing_constraint(beta in 0.1..3.0_f64, table in prop::collection::vec(0.6..50.0_f64, 4..32)) {
        let candidates = [
            Some(RateFunction::exponential(beta).unwrap()),
            RateFunction::custom(table.iter().map(|v| v + 1.0).collect()).ok(),
        ];
        for rf in candidates.into_iter().flatten() {
            let (lo, hi) = rf.valid_range();
            for z in lo.max(-8)..=hi.min(8) {
                if -z + 1 < lo || -z + 1 > hi {
                    continue;
                }
                let prod = rf.rate(z).unwrap() * rf.rate(-z + 1).unwrap();
                prop_assert!((prod - 1.0).abs() < 1e-12, "z = {z}: {prod}");
            }
        }
    }

    /// Truncated measures normalize within their tail tolerance, satisfy the
    /// ratio identities on interior points, and have e^{±θ} expected rates.
    #[test]
    fn measure_identities(beta in 0.3..2.5_f64, theta_frac in -0.8..0.8_f64) {
        let rf = RateFunction::exponential(beta).unwrap();
        let theta = theta_frac * 2.0;
        let m = build_measure(&rf, theta, 1e-12).unwrap();
        let mass: f64 = m.atoms().map(|(_, p)| p).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-12 + 1e-14);
        let (lo, hi) = m.support();
        for z in (lo + 1)..hi {
            let fwd = theta.exp() * m.pmf(z - 1) / m.pmf(z);
            let r = rf.rate(z).unwrap();
            prop_assert!((fwd - r).abs() <= 1e-10 * r.max(1.0));
        }
        let (f, b) = m.expected_rates().unwrap();
        prop_assert!((f - theta.exp()).abs() <= 1e-10 * theta.exp().max(1.0));
        prop_assert!((b - (-theta).exp()).abs() <= 1e-10 * (-theta).exp().max(1.0));
    }

    /// The mean map is strictly increasing and inverts through theta_of_u.
    #[test]
    fn mean_map_monotone_and_invertible(
        beta in 0.4..2.0_f64,
        a in -1.5..1.5_f64,
        gap in 0.05..1.0_f64,
    ) {
        let rf = RateFunction::exponential(beta).unwrap();
        let (ua, ub) = (
            build_measure(&rf, a, 1e-12).unwrap().mean(),
            build_measure(&rf, a + gap, 1e-12).unwrap().mean(),
        );
        prop_assert!(ub > ua, "mean not increasing: u({a}) = {ua}, u({}) = {ub}", a + gap);
        let back = theta_of_u(&rf, ua, 1e-11).unwrap();
        prop_assert!((back - a).abs() < 1e-8, "theta_of_u({ua}) = {back} vs {a}");
    }

    /// Walker site rates are positive, monotone in the left count, and sum
    /// to the configuration-independent totals.
    #[test]
    fn walker_rate_identities(
        positions in prop::collection::vec(-12_i64..12, 1..7),
        theta_left in -1.5..2.0_f64,
        beta in 0.2..1.6_f64,
    ) {
        let cfg = WalkerConfig::new(positions, theta_left, beta).unwrap();
        let (want_r, want_l) = total_rates(&cfg);
        let (mut sum_r, mut sum_l) = (0.0, 0.0);
        let all_lone = cfg.occupied().iter().all(|g| g.count == 1);
        let mut prev_right = f64::INFINITY;
        let mut prev_left = 0.0;
        for g in cfg.occupied() {
            let (r, l) = site_rates(&cfg, g.site).unwrap();
            prop_assert!(r > 0.0 && l > 0.0);
            // Monotone interaction is a fixed-multiplicity statement: only
            // compare across positions when every walker is alone.
            if all_lone {
                prop_assert!(r < prev_right, "right rates must fall with k");
                prop_assert!(l > prev_left, "left rates must rise with k");
                prev_right = r;
                prev_left = l;
            }
            sum_r += r;
            sum_l += l;
        }
        prop_assert!((sum_r - want_r).abs() <= 1e-12 * want_r.max(1.0));
        prop_assert!((sum_l - want_l).abs() <= 1e-12 * want_l.max(1.0));
    }

    /// Selection from a partial-sum tree always lands on the leaf whose
    /// cumulative interval contains the target.
    #[test]
    fn rate_tree_select_matches_linear_scan(
        rates in prop::collection::vec(0.0..10.0_f64, 1..40),
        frac in 0.0..1.0_f64,
    ) {
        let total: f64 = rates.iter().sum();
        prop_assume!(total > 0.0);
        let tree = RateTree::from_rates(&rates);
        prop_assert!((tree.total() - total).abs() < 1e-9);
        let target = frac * total * (1.0 - 1e-12);
        let picked = tree.select(target);
        // Linear scan reference.
        let mut acc = 0.0;
        let mut want = rates.len() - 1;
        for (i, r) in rates.iter().enumerate() {
            acc += r;
            if target < acc {
                want = i;
                break;
            }
        }
        // Ties at float boundaries may differ by one zero-rate run; the
        // picked leaf must in any case be positive and within one cumulative
        // step of the reference.
        prop_assert!(rates[picked] > 0.0);
        let cum_before: f64 = rates[..picked].iter().sum();
        let cum_after = cum_before + rates[picked];
        prop_assert!(
            target >= cum_before - 1e-9 && target <= cum_after + 1e-9,
            "picked {picked} (reference {want}) for target {target}"
        );
    }
}
