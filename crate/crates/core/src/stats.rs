//! Small statistics helpers shared by the estimators.

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Exact integer accumulator for the first two moments of a count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountMoments {
    pub n: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl CountMoments {
    pub fn push(&mut self, x: u64) {
        self.n += 1;
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    pub fn merge(&mut self, other: &CountMoments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum as f64 / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let mean = self.mean();
        ((self.sum_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Mean and standard error of a sample of reals.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    let (_, se) = mean_stderr(xs);
    se * (xs.len() as f64).sqrt()
}

/// Standard error of a binomial proportion.
pub fn proportion_stderr(successes: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let p = successes as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Upper one-sided `z` quantile, e.g. `z_upper(0.05) ≈ 1.645`.
pub fn z_upper(alpha: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(1.0 - alpha)
}

/// Two-sided normal p-value for a z statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    if !z.is_finite() {
        return if z.is_nan() { 1.0 } else { 0.0 };
    }
    2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(z.abs()))
}

/// Upper-tail probability of a chi-square statistic.
pub fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Quantile of an integer histogram (`hist[v]` = multiplicity of value `v`),
/// using the lower median convention `⌈q·n⌉`-th smallest value.
pub fn histogram_quantile(hist: &[u64], q: f64) -> Option<u32> {
    let n: u64 = hist.iter().sum();
    if n == 0 {
        return None;
    }
    let rank = ((q * n as f64).ceil() as u64).clamp(1, n);
    let mut acc = 0;
    for (v, &c) in hist.iter().enumerate() {
        acc += c;
        if acc >= rank {
            return Some(v as u32);
        }
    }
    None
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Bootstrap resample of indices `0..n`.
pub fn resample_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Empirical quantile of a sorted slice (nearest rank).
pub fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_moments_match_direct() {
        let xs = [1u64, 4, 4, 9, 30];
        let mut m = CountMoments::default();
        xs.iter().for_each(|&x| m.push(x));
        let fs: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        let (mean, se) = mean_stderr(&fs);
        assert!((m.mean() - mean).abs() < 1e-12);
        assert!((m.stderr() - se).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        assert_eq!(histogram_quantile(&[0, 2, 1, 1], 0.5), Some(1));
        assert_eq!(histogram_quantile(&[0, 1, 1, 2], 0.5), Some(2));
        assert_eq!(histogram_quantile(&[], 0.5), None);
        assert!((z_upper(0.05) - 1.6449).abs() < 1e-3);
    }

    #[test]
    fn chi_square_tail() {
        assert!((chi_square_sf(3.841, 1.0) - 0.05).abs() < 1e-3);
        assert_eq!(chi_square_sf(1.0, 0.0), 1.0);
    }

    #[test]
    fn slope_of_line() {
        let (s, c) = least_squares(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
    }
}
