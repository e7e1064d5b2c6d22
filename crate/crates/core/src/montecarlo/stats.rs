//! Batch-means statistics for autocorrelated queue output.
//!
//! Sojourn and waiting times coming out of a queue are serially correlated,
//! so naive iid confidence intervals would be too tight. The post-warmup
//! series is cut into equal batches (at least 30 when the sample allows)
//! and intervals come from the spread of the per-batch statistics.

/// Normal 97.5% quantile, for two-sided 95% intervals.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Minimum batch count the splitter aims for.
pub const MIN_BATCHES: usize = 30;

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Split into `MIN_BATCHES`-or-more equal batches (any remainder widens the
/// last batch) and return per-batch views.
pub fn batches(xs: &[f64]) -> Vec<&[f64]> {
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let k = MIN_BATCHES.min(n.max(1));
    let size = (n / k).max(1);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let end = if i == k - 1 { n } else { (start + size).min(n) };
        if start >= end {
            break;
        }
        out.push(&xs[start..end]);
        start = end;
    }
    out
}

/// 95% half-width from per-batch statistics, treating batches as iid.
pub fn ci_from_batch_stats(batch_stats: &[f64]) -> f64 {
    let k = batch_stats.len();
    if k < 2 {
        return f64::INFINITY;
    }
    Z_95 * (variance(batch_stats) / k as f64).sqrt()
}

/// Binomial 95% half-width for a success fraction.
pub fn binomial_ci(p_hat: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    Z_95 * (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mean_and_variance_basics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert_relative_eq!(variance(&xs), 5.0 / 3.0, max_relative = 1e-14);
        assert_eq!(variance(&[1.0]), 0.0);
    }

    #[test]
    fn batches_cover_everything_once() {
        let xs: Vec<f64> = (0..1234).map(|i| i as f64).collect();
        let bs = batches(&xs);
        assert!(bs.len() >= 30);
        let total: usize = bs.iter().map(|b| b.len()).sum();
        assert_eq!(total, xs.len());
    }

    #[test]
    fn iid_interval_covers_truth() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, 0);
        // mean 3, variance 1/6 via a sum of two uniforms
        let xs: Vec<f64> = (0..30_000)
            .map(|_| 3.0 + (rng.random::<f64>() + rng.random::<f64>() - 1.0))
            .collect();
        let batch_means: Vec<f64> = batches(&xs).iter().map(|b| mean(b)).collect();
        let half = ci_from_batch_stats(&batch_means);
        assert!((mean(&xs) - 3.0).abs() < 3.0 * half);
        assert!(half < 0.02);
        let batch_vars: Vec<f64> = batches(&xs).iter().map(|b| variance(b)).collect();
        let var_half = ci_from_batch_stats(&batch_vars);
        assert!((variance(&xs) - 1.0 / 6.0).abs() < 4.0 * var_half);
    }

    #[test]
    fn small_samples_get_infinite_intervals() {
        assert_eq!(ci_from_batch_stats(&[1.0]), f64::INFINITY);
        assert_eq!(binomial_ci(0.5, 0), f64::INFINITY);
    }
}
