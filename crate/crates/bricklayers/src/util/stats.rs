//! Small statistical helpers: Poisson-family laws, replica estimators,
//! bootstrap confidence intervals, and multiplicity-corrected z thresholds.

use statrs::distribution::{ContinuousCDF, Normal};

/// Poisson pmf as a vector over `0..=kmax`, computed iteratively.
pub fn poisson_pmf(mean: f64, kmax: usize) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(kmax + 1);
    let mut p = (-mean).exp();
    pmf.push(p);
    for k in 1..=kmax {
        p *= mean / k as f64;
        pmf.push(p);
    }
    pmf
}

/// Law of the difference `N_+ - N_-` of two independent Poisson counts with
/// means `mean_plus` and `mean_minus` (a Skellam law), as `(d_min, pmf)`.
///
/// The support is truncated where both Poisson tails fall below 1e-14 of
/// their mass; the returned pmf then sums to 1 up to that tail.
pub fn poisson_difference_pmf(mean_plus: f64, mean_minus: f64) -> (i64, Vec<f64>) {
    let kmax = |m: f64| ((m + 12.0 * m.sqrt() + 25.0).ceil() as usize).max(8);
    let kp = kmax(mean_plus);
    let km = kmax(mean_minus);
    let pp = poisson_pmf(mean_plus, kp);
    let pm = poisson_pmf(mean_minus, km);
    let d_min = -(km as i64);
    let mut pmf = vec![0.0; kp + km + 1];
    for (i, a) in pp.iter().enumerate() {
        for (j, b) in pm.iter().enumerate() {
            pmf[i + km - j] += a * b;
        }
    }
    (d_min, pmf)
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical quantile (nearest-rank on a sorted copy), `q` in `[0, 1]`.
pub fn quantile(samples: &[f64], q: f64) -> f64 {
    assert!(!samples.is_empty());
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

/// Percentile bootstrap confidence interval for a statistic of the sample.
pub fn bootstrap_ci<F>(
    samples: &[f64],
    stat: F,
    resamples: usize,
    level: f64,
    rng: &mut impl rand::Rng,
) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = samples.len();
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let resample: Vec<f64> = (0..n).map(|_| samples[rng.gen_range(0..n)]).collect();
            stat(&resample)
        })
        .collect();
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    let lo = stats[((alpha * resamples as f64) as usize).min(resamples - 1)];
    let hi = stats[(((1.0 - alpha) * resamples as f64) as usize).min(resamples - 1)];
    (lo, hi)
}

/// Two-sided tail probability of a standard normal beyond `z`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    2.0 * (1.0 - n.cdf(z.abs()))
}

/// Multiplicity-corrected z threshold: the per-test two-sided threshold whose
/// Bonferroni-corrected family error equals the two-sided tail mass of a
/// base `z_base` test. For `m = 1` this is `z_base` itself; it grows slowly
/// with the number of simultaneous tests.
pub fn z_threshold(z_base: f64, m: usize) -> f64 {
    let family_p = normal_two_sided_p(z_base);
    let per_test = (family_p / m.max(1) as f64).min(1.0);
    let n = Normal::new(0.0, 1.0).unwrap();
    n.inverse_cdf(1.0 - per_test / 2.0)
}

/// Total-variation distance between an empirical integer-valued sample and a
/// reference pmf given as `(d_min, probs)`.
pub fn empirical_tv(samples: &[i64], d_min: i64, pmf: &[f64]) -> f64 {
    let mut counts = vec![0.0_f64; pmf.len()];
    let mut outside = 0.0;
    let w = 1.0 / samples.len() as f64;
    for &s in samples {
        let idx = s - d_min;
        if idx >= 0 && (idx as usize) < pmf.len() {
            counts[idx as usize] += w;
        } else {
            outside += w;
        }
    }
    let mut tv = outside;
    for (c, p) in counts.iter().zip(pmf.iter()) {
        tv += (c - p).abs();
    }
    0.5 * tv
}
