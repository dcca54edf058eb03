//! Tapered fractional Brownian and stable motion of the third kind.
//!
//! ```text
//! h̃(t; u) = min(t−u, c)^e · 1(−c, t)(u) − (−u)^e · 1(−c, 0)(u),   e = H − 1/α
//! Z(t)    = ∫ h̃(t; u) M(du)
//! ```
//!
//! `M` is Gaussian with `Var M(A) = σ|A|` when `α = 2`, and α-stable with
//! control measure `σ·Leb` and skewness `β̄` otherwise.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::kernels::{kernel_inner_product, KernelShape, KernelSum};
use super::stable::{log_cf_from_integrals, StableSampler};
use crate::error::{domain, Error, Result};
use crate::rng::stream;
use crate::special::dot;

/// Default number of Riemann cells across `[−c, t_max]`.
pub const DEFAULT_CELLS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfKernel {
    pub h: f64,
    pub alpha: f64,
    pub c: f64,
}

impl TfKernel {
    pub fn new(h: f64, alpha: f64, c: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return domain(format!("H={h} must be positive"));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return domain(format!("alpha={alpha} outside (0, 2]"));
        }
        if alpha == 1.0 {
            return Err(Error::Unsupported("alpha = 1 is excluded".into()));
        }
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("c={c} must be positive"));
        }
        Ok(Self { h, alpha, c })
    }

    /// Gaussian kernel matching the limit of the moderately tapered LRD/ND sums.
    pub fn for_beta(beta: f64, c: f64) -> Result<Self> {
        Self::new(1.5 - beta, 2.0, c)
    }

    pub fn exponent(&self) -> f64 {
        self.h - 1.0 / self.alpha
    }

    /// `h̃ = scale · shape`.
    fn shape(&self) -> (KernelShape, f64) {
        let e = self.exponent();
        if e == 0.0 {
            (KernelShape::Indicator { level: 1.0 }, 1.0)
        } else {
            (KernelShape::Capped { d: e, c: self.c }, e)
        }
    }

    pub fn eval(&self, t: f64, u: f64) -> f64 {
        if t <= -self.c {
            return 0.0;
        }
        let (shape, scale) = self.shape();
        scale * shape.eval(u, t)
    }

    /// `∫_a^b h̃(t; u) du` from closed-form antiderivatives.
    pub fn cell_integral(&self, t: f64, a: f64, b: f64) -> f64 {
        let c = self.c;
        let e = self.exponent();
        let e1 = e + 1.0;
        let mut total = 0.0;
        // min(t−u, c)^e on (−c, t)
        let (lo, hi) = (a.max(-c), b.min(t));
        if hi > lo {
            let knee = t - c;
            let flat_hi = hi.min(knee);
            if flat_hi > lo {
                total += c.powf(e) * (flat_hi - lo);
            }
            let pow_lo = lo.max(knee);
            if hi > pow_lo {
                total += ((t - pow_lo).powf(e1) - (t - hi).powf(e1)) / e1;
            }
        }
        // (−u)^e on (−c, 0)
        let (lo, hi) = (a.max(-c), b.min(0.0));
        if hi > lo {
            total -= ((-lo).powf(e1) - (-hi).powf(e1)) / e1;
        }
        total
    }

    /// `(∫|h̃|^α, ∫h̃^{⟨α⟩})` for a combination `Σ x_l h̃(t_l; ·)`.
    pub fn alpha_integrals(&self, terms: &[(f64, f64)]) -> Result<(f64, f64)> {
        let (shape, scale) = self.shape();
        let ks = KernelSum { shape, terms: terms.iter().filter(|p| p.1 > -self.c).copied().collect() };
        if ks.terms.is_empty() {
            return Ok((0.0, 0.0));
        }
        let (a, s) = ks.alpha_integrals(self.alpha)?;
        let w = scale.abs().powf(self.alpha);
        Ok((w * a, scale.signum() * w * s))
    }

    pub fn log_cf(&self, sigma: f64, skew: f64, terms: &[(f64, f64)], theta: f64) -> Result<Complex64> {
        let (a, s) = self.alpha_integrals(terms)?;
        Ok(log_cf_from_integrals(self.alpha, sigma, skew, a, s, theta))
    }
}

/// `σ ∫ h̃(t; u) h̃(s; u) du` with `e = H − 1/2`.
pub fn tf3_covariance(h: f64, c: f64, t: f64, s: f64, sigma: f64) -> Result<f64> {
    let k = TfKernel::new(h, 2.0, c)?;
    if t <= 0.0 || s <= 0.0 {
        if t < 0.0 || s < 0.0 {
            return domain("times must be non-negative");
        }
        return Ok(0.0);
    }
    let (shape, scale) = k.shape();
    Ok(sigma * scale * scale * kernel_inner_product(shape, t, s)?)
}

/// `σ` making `W̃(1) = 1`.
pub fn unit_sigma(h: f64, c: f64) -> Result<f64> {
    Ok(1.0 / tf3_covariance(h, c, 1.0, 1.0, 1.0)?)
}

/// Paths of the third-kind process on `t_grid` from a Riemann sum over
/// `cells` equal cells of `[−c, max t]`; one row per replica.
pub fn simulate_tfsm3(
    kernel: &TfKernel,
    sigma: f64,
    skew: f64,
    t_grid: &[f64],
    cells: usize,
    replicas: usize,
    master_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if kernel.exponent() <= -1.0 {
        return domain(format!("kernel exponent H - 1/alpha = {} is not locally integrable", kernel.exponent()));
    }
    if cells == 0 {
        return domain("need at least one cell");
    }
    let c = kernel.c;
    let t_max = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if t_grid.is_empty() || t_max <= -c {
        return Ok(vec![vec![0.0; t_grid.len()]; replicas]);
    }
    let delta = (c + t_max) / cells as f64;
    // cell averages of h̃, one row per t
    let weights: Vec<Vec<f64>> = t_grid
        .iter()
        .map(|&t| {
            (0..cells)
                .map(|k| {
                    let a = -c + k as f64 * delta;
                    let b = if k + 1 == cells { t_max } else { -c + (k + 1) as f64 * delta };
                    kernel.cell_integral(t, a, b) / delta
                })
                .collect()
        })
        .collect();
    let gaussian = kernel.alpha == 2.0;
    let factor = (sigma * delta).powf(1.0 / kernel.alpha);
    let sampler = if gaussian { None } else { Some(StableSampler::new(kernel.alpha, skew)?) };
    let paths = (0..replicas as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; cells],
            |noise, r| {
                let mut rng = stream(master_seed, r);
                for x in noise.iter_mut() {
                    *x = match &sampler {
                        None => StandardNormal.sample(&mut rng),
                        Some(s) => s.sample(&mut rng),
                    };
                }
                weights.iter().map(|w| factor * dot(w, noise)).collect::<Vec<f64>>()
            },
        )
        .collect();
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_integral_matches_quadrature() {
        let k = TfKernel::new(0.8, 2.0, 1.0).unwrap();
        let (a, b) = (-0.7, 0.9);
        let t = 0.5;
        let n = 200_000;
        let h = (b - a) / n as f64;
        let riemann: f64 = (0..n).map(|i| k.eval(t, a + (i as f64 + 0.5) * h) * h).sum();
        assert!((k.cell_integral(t, a, b) - riemann).abs() < 1e-5);
    }

    #[test]
    fn empty_support_gives_zero_paths() {
        let k = TfKernel::new(0.8, 2.0, 1.0).unwrap();
        let p = simulate_tfsm3(&k, 1.0, 0.0, &[-1.5, -1.0], 64, 3, 1).unwrap();
        assert!(p.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn half_exponent_is_brownian() {
        // e = 0: h̃ = 1[0, t), covariance min(t, s)
        let v = tf3_covariance(0.5, 1.0, 0.7, 1.3, 1.0).unwrap();
        assert!((v - 0.7).abs() < 1e-12);
    }

    #[test]
    fn small_t_constant() {
        // W̃(t)/t^{3−2β} → (1−β)² C_0 + 1/(3−2β)
        let beta: f64 = 0.7;
        let t: f64 = 1e-6;
        let lim = (1.0 - beta).powi(2) * super::super::constants::c0(beta).unwrap() + 1.0 / (3.0 - 2.0 * beta);
        let v = tf3_covariance(1.5 - beta, 1.0, t, t, 1.0).unwrap() / t.powf(3.0 - 2.0 * beta);
        assert!((v / lim - 1.0).abs() < 1e-3, "{v} vs {lim}");
    }

    #[test]
    fn large_t_linear_growth() {
        let beta: f64 = 0.7;
        let c: f64 = 1.0;
        let t: f64 = 1e4;
        let d = 1.0 - beta;
        let exact = c.powf(2.0 * d) * t - 2.0 * d * c.powf(3.0 - 2.0 * beta) / ((2.0 - beta) * (3.0 - 2.0 * beta));
        let v = tf3_covariance(1.5 - beta, c, t, t, 1.0).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-8, "{v} vs {exact}");
    }
}
