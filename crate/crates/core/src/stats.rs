//! Replica statistics: moments, bootstrap standard errors, KS tests, slopes.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{stream, BOOTSTRAP_STREAM};
use crate::special::KahanSum;

pub const DEFAULT_RESAMPLES: usize = 500;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<KahanSum>().value() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).collect::<KahanSum>().value() / (xs.len() as f64 - 1.0)
}

/// Resample index sets drawn from the reserved bootstrap stream. The same
/// sets are reused for every cell of a report.
#[derive(Debug, Clone)]
pub struct Bootstrap {
    sets: Vec<Vec<u32>>,
}

impl Bootstrap {
    pub fn new(master_seed: u64, n: usize, resamples: usize) -> Self {
        let mut rng = stream(master_seed, BOOTSTRAP_STREAM);
        let sets = (0..resamples).map(|_| (0..n).map(|_| rng.random_range(0..n as u32)).collect()).collect();
        Self { sets }
    }

    pub fn resamples(&self) -> usize {
        self.sets.len()
    }

    /// Bootstrap standard deviation of `stat` over the resamples.
    pub fn std_error<F: Fn(&[f64]) -> f64>(&self, xs: &[f64], stat: F) -> f64 {
        let mut buf = vec![0.0; xs.len()];
        let vals: Vec<f64> = self
            .sets
            .iter()
            .map(|idx| {
                for (b, &i) in buf.iter_mut().zip(idx) {
                    *b = xs[i as usize];
                }
                stat(&buf)
            })
            .collect();
        variance(&vals).sqrt()
    }

    /// Bootstrap standard deviation of a statistic computed from each index set.
    pub fn std_error_by<F: Fn(&[u32]) -> f64>(&self, stat: F) -> f64 {
        let vals: Vec<f64> = self.sets.iter().map(|idx| stat(idx)).collect();
        variance(&vals).sqrt()
    }

    /// Bootstrap standard errors of the real and imaginary parts of the
    /// empirical CF `(1/R)Σ exp(iθx)`.
    pub fn cf_std_error(&self, xs: &[f64], theta: f64) -> (f64, f64) {
        let (c, s): (Vec<f64>, Vec<f64>) = xs.iter().map(|&x| ((theta * x).cos(), (theta * x).sin())).unzip();
        let avg = |v: &[f64]| -> Vec<f64> {
            self.sets
                .iter()
                .map(|idx| idx.iter().map(|&i| v[i as usize]).collect::<KahanSum>().value() / idx.len() as f64)
                .collect()
        };
        (variance(&avg(&c)).sqrt(), variance(&avg(&s)).sqrt())
    }
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut acc = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        acc += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * acc).clamp(0.0, 1.0)
}

/// KS distance to the normal with the sample's mean and variance, and its
/// p-value with Stephens' finite-sample adjustment.
pub fn ks_normal(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 8 {
        return Err(Error::InsufficientData(format!("KS test needs at least 8 points, got {}", xs.len())));
    }
    let sd = variance(xs).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Numerical("KS test on a degenerate sample".into()));
    }
    let law = Normal::new(mean(xs), sd).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let rn = n.sqrt();
    Ok((d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)))
}

/// Two-sample KS distance and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("two-sample KS needs non-empty samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let rn = ne.sqrt();
    Ok((d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)))
}

/// Least-squares fit `y = a + b·x`; returns `(b, a, stderr(b))`. The
/// standard error is NaN with exactly two points.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Usage("slope fit needs equally long inputs".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientData(format!("slope fit needs at least 2 points, got {n}")));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("slope fit needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let se = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok((b, a, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // P(K > 1.36) ≈ 0.049, P(K > 1.63) ≈ 0.0098
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 2e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_accepts_normal_rejects_uniform() {
        let mut rng = stream(1, 0);
        let xs: Vec<f64> = (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(ks_normal(&xs).unwrap().1 > 0.01);
        let us: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_normal(&us).unwrap().1 < 0.01);
    }

    #[test]
    fn two_sample_ks() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (d, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap().0, 1.0);
    }

    #[test]
    fn bootstrap_se_of_mean() {
        let mut rng = stream(2, 0);
        let xs: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b = Bootstrap::new(3, xs.len(), DEFAULT_RESAMPLES);
        let se = b.std_error(&xs, mean);
        let expect = 1.0 / (2000f64).sqrt();
        assert!((se / expect - 1.0).abs() < 0.15, "{se} vs {expect}");
    }

    #[test]
    fn slope_fit() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (b, a, se) = ls_slope(&x, &y).unwrap();
        assert!((b - 2.0).abs() < 1e-14 && (a - 1.0).abs() < 1e-14 && se.abs() < 1e-7);
        assert!(matches!(ls_slope(&[1.0], &[2.0]), Err(Error::InsufficientData(_))));
    }
}
