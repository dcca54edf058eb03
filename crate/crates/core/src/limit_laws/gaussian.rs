//! Covariances and exact finite-dimensional simulation of the Gaussian limits.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{CovarianceSource, GaussianLimit};
use crate::error::{Error, Result};
use crate::rng::stream;

/// Largest diagonal jitter, relative to the largest variance, tried before
/// a covariance matrix is declared indefinite.
pub const MAX_JITTER: f64 = 1e-10;

/// Largest supported time grid.
pub const MAX_GRID: usize = 64;

pub fn gaussian_covariance(j: u8, t: f64, s: f64, beta: f64, c: f64) -> Result<f64> {
    GaussianLimit::new(j, beta, c)?.covariance(t, s)
}

fn cholesky(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = cov.diagonal().max().max(f64::MIN_POSITIVE);
    for jitter in [0.0, 1e-14, 1e-12, MAX_JITTER] {
        let m = cov + DMatrix::identity(cov.nrows(), cov.ncols()) * (jitter * scale);
        if let Some(ch) = m.cholesky() {
            return Ok(ch.l());
        }
    }
    Err(Error::Numerical(format!("covariance matrix is not positive definite within jitter {MAX_JITTER:e}")))
}

/// Replicas of `(U(t_1), …, U(t_m))`, one row per replica.
pub fn simulate_gaussian_limit(
    law: &GaussianLimit,
    t_grid: &[f64],
    replicas: usize,
    master_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let m = t_grid.len();
    if m > MAX_GRID {
        return Err(Error::Size(format!("time grid of {m} points exceeds {MAX_GRID}")));
    }
    if law.source == CovarianceSource::Degenerate {
        return Ok((0..replicas as u64)
            .into_par_iter()
            .map(|r| {
                let z: f64 = StandardNormal.sample(&mut stream(master_seed, r));
                t_grid.iter().map(|&t| t * z).collect()
            })
            .collect());
    }
    if t_grid.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::Domain("times must be finite and non-negative".into()));
    }
    // U(0) = 0 exactly; only positive times enter the factorization
    let live: Vec<usize> = (0..m).filter(|&a| t_grid[a] > 0.0).collect();
    let k = live.len();
    let mut cov = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..=a {
            let v = law.covariance(t_grid[live[a]], t_grid[live[b]])?;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let l = cholesky(&cov)?;
    Ok((0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(master_seed, r);
            let z: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut path = vec![0.0; m];
            for (a, &idx) in live.iter().enumerate() {
                path[idx] = (0..=a).map(|b| l[(a, b)] * z[b]).sum();
            }
            path
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_paths_are_linear() {
        let g = GaussianLimit::new(11, 0.0, 1.0).unwrap();
        let p = simulate_gaussian_limit(&g, &[0.5, 1.0, 2.0], 20, 3).unwrap();
        for row in p {
            assert_eq!(row[0], 0.5 * row[1]);
            assert_eq!(row[2], 2.0 * row[1]);
        }
    }

    #[test]
    fn brownian_sample_covariance() {
        let g = GaussianLimit::new(8, 1.2, 1.0).unwrap();
        let grid = [0.5, 1.0];
        let n = 100_000;
        let p = simulate_gaussian_limit(&g, &grid, n, 9).unwrap();
        let cross: Vec<f64> = p.iter().map(|r| r[0] * r[1]).collect();
        let mean = cross.iter().sum::<f64>() / n as f64;
        let var = cross.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.5).abs() < 3.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn single_point_variance() {
        let g = GaussianLimit::new(4, 0.7, 1.0).unwrap();
        let p = simulate_gaussian_limit(&g, &[2.0], 1, 1).unwrap();
        assert_eq!(p.len(), 1);
        let l = cholesky(&DMatrix::from_element(1, 1, g.covariance(2.0, 2.0).unwrap())).unwrap();
        assert!((l[(0, 0)].powi(2) - 2f64.powf(1.6)).abs() < 1e-12);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky(&m), Err(Error::Numerical(_))));
    }

    #[test]
    fn origin_is_exactly_zero() {
        let g = GaussianLimit::new(7, 0.7, 1.0).unwrap();
        for row in simulate_gaussian_limit(&g, &[0.0, 0.5, 1.0], 50, 2).unwrap() {
            assert_eq!(row[0], 0.0);
            assert!(row[1] != 0.0);
        }
    }

    #[test]
    fn oversized_grid_rejected() {
        let g = GaussianLimit::new(8, 1.2, 1.0).unwrap();
        let grid: Vec<f64> = (1..=65).map(|k| k as f64).collect();
        assert!(matches!(simulate_gaussian_limit(&g, &grid, 1, 0), Err(Error::Size(_))));
    }
}
