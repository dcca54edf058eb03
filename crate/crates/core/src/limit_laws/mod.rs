//! Limit objects of the normalized partial sums.
//!
//! * [`constants`]: `C_0 … C_20`, `W^(j)`, Hurst indices, normalizer exponents.
//! * [`kernels`]: the kernels `𝓗^(j)` and integrals of their powers.
//! * [`stable`]: stable log-CFs and a skewed sampler.
//! * [`tf3`]: tapered fractional motions of the third kind.
//! * [`gaussian`]: covariances and exact simulation of the Gaussian limits.

pub mod constants;
pub mod gaussian;
pub mod kernels;
pub mod stable;
pub mod tf3;

use num_complex::Complex64;

pub use constants::{constant, hurst, limit_variance, limit_variance_prop3, normalizer_exponent};
pub use gaussian::{gaussian_covariance, simulate_gaussian_limit};
pub use kernels::{KernelShape, KernelSum};
pub use stable::{pareto_stable_scale, StableSampler};
pub use tf3::{simulate_tfsm3, tf3_covariance, TfKernel};

use crate::error::{domain, Error, Result};
use crate::filters::FilterSpec;

/// Where the covariance of a Gaussian limit comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceSource {
    /// `½(W(t) + W(s) − W(|t−s|))`.
    StationaryIncrementFormula,
    /// `∫𝓗(u,t)𝓗(u,s)du / ∫𝓗(u,1)²du`.
    KernelQuadrature,
    /// `U(t) = t·U(1)`.
    Degenerate,
}

fn check_case(j: u8) -> Result<()> {
    if (1..=12).contains(&j) {
        Ok(())
    } else {
        Err(Error::Usage(format!("case index j={j} outside 1..=12")))
    }
}

/// Admissible β for the Gaussian limit of case `j`.
fn check_gaussian_beta(j: u8, beta: f64) -> Result<()> {
    let ok = match j {
        1 | 4 | 7 => beta > 0.5 && beta < 1.0,
        2 | 5 | 8 => beta > 1.0,
        3 | 6 | 9 => beta > 1.0 && beta < 1.5,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        let need = match j {
            1 | 4 | 7 => "LRD 1/2 < beta < 1",
            2 | 5 | 8 => "SRD beta > 1",
            _ => "ND 1 < beta < 3/2",
        };
        domain(format!("j={j} requires {need}, got beta={beta}"))
    }
}

/// Gaussian limit `U^(j)` of case `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLimit {
    pub j: u8,
    pub beta: f64,
    pub c: f64,
    pub source: CovarianceSource,
}

impl GaussianLimit {
    /// `beta` is ignored for `j = 10, 11, 12`.
    pub fn new(j: u8, beta: f64, c: f64) -> Result<Self> {
        check_case(j)?;
        check_gaussian_beta(j, beta)?;
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("c={c} must be positive"));
        }
        let source = match j {
            7 | 9 | 12 => CovarianceSource::KernelQuadrature,
            11 => CovarianceSource::Degenerate,
            _ => CovarianceSource::StationaryIncrementFormula,
        };
        let beta = if j >= 10 { 0.0 } else { beta };
        Ok(Self { j, beta, c, source })
    }

    pub fn hurst(&self) -> Option<f64> {
        hurst(self.j, self.beta)
    }

    pub fn variance(&self, t: f64) -> Result<f64> {
        limit_variance(self.j, t, self.beta, self.c)
    }

    /// Kernel with `Cov U(t)U(s) ∝ ∫𝓗(u,t)𝓗(u,s)du`, for the quadrature cases.
    pub fn kernel(&self) -> Option<KernelShape> {
        match self.j {
            7 | 9 => Some(KernelShape::Capped { d: 1.0 - self.beta, c: self.c }),
            12 => Some(KernelShape::Capped { d: 1.0, c: self.c }),
            _ => None,
        }
    }

    pub fn covariance(&self, t: f64, s: f64) -> Result<f64> {
        if !(t >= 0.0 && s >= 0.0 && t.is_finite() && s.is_finite()) {
            return domain(format!("times ({t}, {s}) must be non-negative"));
        }
        if t == 0.0 || s == 0.0 {
            return Ok(0.0);
        }
        match self.source {
            CovarianceSource::StationaryIncrementFormula => {
                let w = |x: f64| self.variance(x);
                Ok(0.5 * (w(t)? + w(s)? - w((t - s).abs())?))
            }
            CovarianceSource::Degenerate => Ok(t * s),
            CovarianceSource::KernelQuadrature => {
                let k = self.kernel().expect("quadrature case has a kernel");
                Ok(kernels::kernel_inner_product(k, t, s)? / kernels::kernel_inner_product(k, 1.0, 1.0)?)
            }
        }
    }
}

/// α-stable limit `U_j` of case `j ∈ 1..=9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLimit {
    pub j: u8,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    /// Skewness intensity of the random measure.
    pub skew: f64,
    /// Control measure scale.
    pub sigma: f64,
    pub shape: KernelShape,
}

impl StableLimit {
    /// Limit for the filter `filter` (its dependence must match `j`).
    pub fn new(j: u8, alpha: f64, filter: &FilterSpec, c: f64) -> Result<Self> {
        use crate::filters::Dependence::*;
        check_case(j)?;
        if j > 9 {
            return Err(Error::Usage(format!("no stable limit for the constant-filter case j={j}")));
        }
        if alpha == 1.0 {
            return Err(Error::Unsupported("alpha = 1 is excluded".into()));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return domain(format!("alpha={alpha} outside (0, 2)"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("c={c} must be positive"));
        }
        let want = match (j - 1) % 3 {
            0 => Lrd,
            1 => Srd,
            _ => Nd,
        };
        let dep = filter.dependence();
        if dep != want && !(want == Srd && dep == Iid) {
            return Err(Error::Usage(format!("j={j} needs a {} filter, got {}", want.name(), dep.name())));
        }
        filter.check_stable(alpha)?;
        let beta = filter.beta();
        let d = 1.0 - beta;
        let shape = match j {
            1 | 3 => KernelShape::Indicator { level: 1.0 / d },
            2 | 5 | 8 => KernelShape::Indicator {
                level: filter.full_sum().ok_or_else(|| Error::Domain("filter sum diverges".into()))?,
            },
            4 | 6 => KernelShape::Fractional { d },
            _ => KernelShape::Capped { d, c },
        };
        Ok(Self { j, alpha, beta, c, skew: 1.0, sigma: pareto_stable_scale(alpha), shape })
    }

    pub fn kernel(&self, u: f64, t: f64) -> f64 {
        self.shape.eval(u, t)
    }

    /// `ln E exp(iθ U_j(t))`.
    pub fn log_cf(&self, theta: f64, t: f64) -> Result<Complex64> {
        self.joint_log_cf(theta, &[(1.0, t)])
    }

    /// `ln E exp(iθ Σ x_l U_j(t_l))` for `terms = [(x_l, t_l)]`.
    pub fn joint_log_cf(&self, theta: f64, terms: &[(f64, f64)]) -> Result<Complex64> {
        if theta == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let terms: Vec<(f64, f64)> = terms.iter().filter(|p| p.1 != 0.0 && p.0 != 0.0).copied().collect();
        if terms.is_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (a, s) = KernelSum { shape: self.shape, terms }.alpha_integrals(self.alpha)?;
        Ok(stable::log_cf_from_integrals(self.alpha, self.sigma, self.skew, a, s, theta))
    }
}

/// `𝓗^(j)(u, t, c)` with the default filter of the case's dependence class
/// (`a_0 = 1`, or the zero-sum `a_0` for ND).
pub fn stable_kernel(j: u8, u: f64, t: f64, beta: f64, c: f64) -> Result<f64> {
    check_case(j)?;
    let filter = match (j - 1) % 3 {
        _ if j > 9 => return Err(Error::Usage(format!("no stable kernel for j={j}"))),
        0 => FilterSpec::lrd(beta)?,
        1 => FilterSpec::srd(beta)?,
        _ => FilterSpec::nd(beta)?,
    };
    let d = 1.0 - beta;
    let shape = match j {
        1 | 3 => KernelShape::Indicator { level: 1.0 / d },
        2 | 5 | 8 => KernelShape::Indicator { level: filter.full_sum().unwrap_or(f64::NAN) },
        4 | 6 => KernelShape::Fractional { d },
        _ => KernelShape::Capped { d, c },
    };
    Ok(shape.eval(u, t))
}

/// `ln E exp(iθ U_j(t))`.
pub fn stable_log_cf(limit: &StableLimit, theta: f64, t: f64) -> Result<Complex64> {
    limit.log_cf(theta, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::zeta;

    #[test]
    fn gaussian_covariance_examples() {
        let g8 = GaussianLimit::new(8, 1.2, 1.0).unwrap();
        assert!((g8.covariance(0.5, 1.0).unwrap() - 0.5).abs() < 1e-14);
        let g4 = GaussianLimit::new(4, 0.7, 1.0).unwrap();
        assert!((g4.covariance(1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(GaussianLimit::new(7, 1.2, 1.0).is_err());
    }

    #[test]
    fn kernel_variance_matches_w() {
        for &(j, beta) in &[(7u8, 0.7), (9, 1.25), (12, 0.0)] {
            let g = GaussianLimit::new(j, beta, 1.0).unwrap();
            for &t in &[0.3, 1.0, 2.5] {
                let k = g.covariance(t, t).unwrap();
                let w = g.variance(t).unwrap();
                assert!((k / w - 1.0).abs() < 1e-8, "j={j} t={t}: {k} vs {w}");
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let sum = 1.0 + zeta(1.2).unwrap();
        assert!((stable_kernel(2, 0.25, 0.5, 1.2, 1.0).unwrap() - sum).abs() < 1e-12);
        let v = stable_kernel(7, 0.4, 1.0, 0.7, 1.0).unwrap();
        assert!((v - 0.6f64.powf(0.3) / 0.3).abs() < 1e-14);
        assert_eq!(stable_kernel(7, 1.2, 1.0, 0.7, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn log_cf_j2_closed_form() {
        let f = FilterSpec::srd(1.2).unwrap();
        let lim = StableLimit::new(2, 1.5, &f, 1.0).unwrap();
        let sum = f.full_sum().unwrap();
        let t = 0.7;
        let theta = 1.3;
        let v = lim.log_cf(theta, t).unwrap();
        let expect = -lim.sigma * (theta * sum).abs().powf(1.5) * t;
        assert!((v.re - expect).abs() < 1e-10 * expect.abs());
        assert!((lim.log_cf(-theta, t).unwrap() - v.conj()).norm() < 1e-12);
        assert_eq!(lim.log_cf(0.0, t).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn stable_rejects_bad_inputs() {
        let f = FilterSpec::srd(1.2).unwrap();
        assert!(matches!(StableLimit::new(2, 1.0, &f, 1.0), Err(Error::Unsupported(_))));
        assert!(StableLimit::new(1, 1.5, &f, 1.0).is_err());
        // LRD needs β > 1/α
        let l = FilterSpec::lrd(0.6).unwrap();
        assert!(StableLimit::new(4, 1.5, &l, 1.0).is_err());
    }
}
