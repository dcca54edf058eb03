//! α-stable limits: log-characteristic functions and a totally skewed sampler.
//!
//! Everything uses the parameterization
//!
//! ```text
//! ln E exp(iθX) = −σ ∫ |θ𝓚(u)|^α du + i σ β̄ tan(πα/2) ∫ (θ𝓚(u))^{⟨α⟩} du
//! ```
//!
//! for `X = ∫ 𝓚 dM`, where `M` has control measure `σ·Leb` and skewness `β̄`.
//! Centered sums of positive Pareto variables converge to the right-skewed
//! law `β̄ = +1` with `σ_α = Γ(1−α)·cos(πα/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::open01;
use crate::special::gamma;

/// Scale of the stable limit of centered (α > 1) or raw (α < 1) Pareto sums.
pub fn pareto_stable_scale(alpha: f64) -> f64 {
    gamma(1.0 - alpha) * (PI * alpha / 2.0).cos()
}

/// Log-CF from the two kernel integrals `∫|𝓚|^α` and `∫𝓚^{⟨α⟩}`.
pub fn log_cf_from_integrals(
    alpha: f64,
    sigma: f64,
    skew: f64,
    abs_int: f64,
    signed_int: f64,
    theta: f64,
) -> Complex64 {
    if theta == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let ta = theta.abs().powf(alpha);
    let tau = (PI * alpha / 2.0).tan();
    Complex64::new(-sigma * ta * abs_int, sigma * skew * tau * theta.signum() * ta * signed_int)
}

/// Characteristic exponent of the standard `S_α(1, β̄, 0)` variable.
pub fn standard_log_cf(alpha: f64, skew: f64, theta: f64) -> Complex64 {
    log_cf_from_integrals(alpha, 1.0, skew, 1.0, 1.0, theta)
}

/// Chambers–Mallows–Stuck draw of `S_α(1, β̄, 0)`, `α ≠ 1`.
///
/// Its log-CF is `−|θ|^α (1 − iβ̄ sign(θ) tan(πα/2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableSampler {
    alpha: f64,
    b: f64,
    s: f64,
}

impl StableSampler {
    pub fn new(alpha: f64, skew: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::Domain(format!("stable index alpha={alpha} outside (0, 2]")));
        }
        if alpha == 1.0 {
            return Err(Error::Unsupported("alpha = 1 stable laws are not supported".into()));
        }
        if !(-1.0..=1.0).contains(&skew) {
            return Err(Error::Domain(format!("skewness {skew} outside [-1, 1]")));
        }
        let tau = skew * (PI * alpha / 2.0).tan();
        let b = tau.atan() / alpha;
        let s = (1.0 + tau * tau).powf(1.0 / (2.0 * alpha));
        Ok(Self { alpha, b, s })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * (open01(rng) - 0.5);
        let w = -open01(rng).ln();
        self.from_parts(v, w)
    }

    /// Transform of `V ~ U(−π/2, π/2)` and `W ~ Exp(1)`.
    #[inline]
    pub fn from_parts(&self, v: f64, w: f64) -> f64 {
        let a = self.alpha;
        let arg = a * (v + self.b);
        let lead = arg.sin() / v.cos().powf(1.0 / a);
        let tail = ((v - arg).cos() / w).powf((1.0 - a) / a);
        self.s * lead * tail
    }
}
