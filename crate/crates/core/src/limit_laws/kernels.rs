//! Limit kernels `𝓗^(j)(u, t, c)` and their integrals.
//!
//! With `d = 1 − β`:
//!
//! ```text
//! j = 1, 3        1/(1−β) on [0, t)
//! j = 2, 5, 8     Σ a_k   on [0, t)
//! j = 4, 6        ((t−u)_+^d − (−u)_+^d)/d          for u < t
//! j = 7, 9        (min(t−u, c)^d − (−u)_+^d)/d      for −c < u < t
//! j = 12          min(t−u, c) − (−u)_+              for −c < u < t   (β = 0)
//! ```
//!
//! Kernels are evaluated at `u = base + off` where `base` is a breakpoint;
//! differences to `base` are then exact, which keeps the `δ^d` singularities
//! accurate arbitrarily close to the breakpoint.

use crate::error::{domain, Result};
use crate::quadrature::{integrate_piece, integrate_power_tail, Estimate, Tolerance};

use super::constants::pow_gap;

pub(crate) const KERNEL_TOL: Tolerance = Tolerance::new(1e-300, 1e-11);

/// Shape of a kernel family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelShape {
    /// `level·1[0, t)(u)`.
    Indicator { level: f64 },
    /// `((t−u)_+^d − (−u)_+^d)/d`, unbounded support to the left.
    Fractional { d: f64 },
    /// `(min(t−u, c)^d − (−u)_+^d)/d` on `(−c, t)`; `d = 1` is the flat case.
    Capped { d: f64, c: f64 },
}

impl KernelShape {
    /// Value at `u = base + off`.
    #[inline]
    pub fn eval_at(&self, t: f64, base: f64, off: f64) -> f64 {
        let tmu = (t - base) - off; // t − u
        let mu = -base - off; // −u
        match *self {
            Self::Indicator { level } => {
                if mu <= 0.0 && tmu > 0.0 {
                    level
                } else {
                    0.0
                }
            }
            Self::Fractional { d } => {
                if tmu <= 0.0 {
                    0.0
                } else if mu <= 0.0 {
                    tmu.powf(d) / d
                } else {
                    // (−u + t)^d − (−u)^d with the gap t exact
                    pow_gap(mu, t, d) / d
                }
            }
            Self::Capped { d, c } => {
                if tmu <= 0.0 || mu >= c {
                    return 0.0;
                }
                let head = tmu.min(c);
                let v = if mu <= 0.0 {
                    head.powf(d)
                } else if tmu < c {
                    pow_gap(mu, t, d)
                } else {
                    c.powf(d) - mu.powf(d)
                };
                if d == 1.0 {
                    v
                } else {
                    v / d
                }
            }
        }
    }

    pub fn eval(&self, u: f64, t: f64) -> f64 {
        self.eval_at(t, u, 0.0)
    }

    fn exponent(&self) -> Option<f64> {
        match *self {
            Self::Indicator { .. } => None,
            Self::Fractional { d } => Some(d),
            Self::Capped { d, .. } => (d != 1.0).then_some(d),
        }
    }

    fn left_end(&self, t_min: f64) -> f64 {
        match *self {
            Self::Indicator { .. } => 0.0,
            Self::Fractional { .. } => f64::NEG_INFINITY,
            Self::Capped { c, .. } => -c,
        }
        .min(t_min)
    }
}

/// A finite combination `Σ_l x_l 𝓗(u, t_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSum {
    pub shape: KernelShape,
    pub terms: Vec<(f64, f64)>,
}

impl KernelSum {
    pub fn single(shape: KernelShape, t: f64) -> Self {
        Self { shape, terms: vec![(1.0, t)] }
    }

    #[inline]
    pub fn eval_at(&self, base: f64, off: f64) -> f64 {
        self.terms.iter().map(|&(x, t)| x * self.shape.eval_at(t, base, off)).sum()
    }

    /// Breakpoints, sorted, with the singular ones flagged.
    fn breakpoints(&self) -> Vec<(f64, bool)> {
        let mut pts: Vec<(f64, bool)> = vec![(0.0, true)];
        for &(_, t) in &self.terms {
            pts.push((t, true));
            match self.shape {
                KernelShape::Capped { c, .. } => {
                    pts.push((-c, false));
                    pts.push((t - c, false));
                }
                KernelShape::Indicator { .. } | KernelShape::Fractional { .. } => {}
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, bool)> = Vec::with_capacity(pts.len());
        for (p, s) in pts {
            match out.last_mut() {
                Some(last) if last.0 == p => last.1 |= s,
                _ => out.push((p, s)),
            }
        }
        out
    }

    /// `∫ F(𝓚(u)) du` over the support, where `F(v) ~ |v|^power` and
    /// `F(0) = 0`; `power` sets the endpoint exponents.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, power: f64) -> Result<Estimate> {
        let t_max = self.terms.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let t_min = self.terms.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        if !(t_min > 0.0) {
            return domain("kernel times must be positive");
        }
        let lo = self.shape.left_end(t_min);
        let pts: Vec<(f64, bool)> =
            self.breakpoints().into_iter().filter(|&(p, _)| p >= lo.max(f64::MIN) && p <= t_max).collect();
        let p_sing = self.shape.exponent().map(|d| if d < 0.0 { d * power } else { d.min(d * power) });
        let mut total = Estimate::ZERO;
        for w in pts.windows(2) {
            let (a, sa) = w[0];
            let (b, sb) = w[1];
            let pa = if sa { p_sing } else { None };
            let pb = if sb { p_sing } else { None };
            total = total + integrate_piece(|base, off| f(self.eval_at(base, off)), a, b, pa, pb, KERNEL_TOL)?;
        }
        if lo.is_infinite() {
            // (−∞, first breakpoint]: tail ~ |u|^{-β} per term
            let first = pts.first().map(|p| p.0).unwrap_or(0.0);
            let d = match self.shape {
                KernelShape::Fractional { d } => d,
                _ => unreachable!(),
            };
            let decay = (1.0 - d) * power;
            let start = 1.0f64.max(t_max);
            if first > -start {
                let p0 = if first == 0.0 { p_sing } else { None };
                total = total
                    + integrate_piece(|base, off| f(self.eval_at(base, off)), -start, first, None, p0, KERNEL_TOL)?;
            }
            total = total + integrate_power_tail(|v| f(self.eval_at(-v, 0.0)), start, decay, KERNEL_TOL)?;
        }
        Ok(total)
    }

    /// `∫ 𝓚(u)² du`.
    pub fn l2(&self) -> Result<f64> {
        Ok(self.integrate(|v| v * v, 2.0)?.value)
    }

    /// `(∫|𝓚|^α du, ∫ 𝓚^{⟨α⟩} du)` with `x^{⟨α⟩} = sign(x)|x|^α`.
    pub fn alpha_integrals(&self, alpha: f64) -> Result<(f64, f64)> {
        let abs = self.integrate(|v| v.abs().powf(alpha), alpha)?.value;
        let signed = self.integrate(|v| v.signum() * v.abs().powf(alpha), alpha)?.value;
        Ok((abs, signed))
    }
}

/// `∫ 𝓗(u, t) 𝓗(u, s) du` for one shape.
pub fn kernel_inner_product(shape: KernelShape, t: f64, s: f64) -> Result<f64> {
    // 4ts = (t+s)² − (t−s)² polarization would lose accuracy; integrate the product.
    let ks = KernelSum { shape, terms: vec![(1.0, t), (1.0, s)] };
    let prod = |base: f64, off: f64| shape.eval_at(t, base, off) * shape.eval_at(s, base, off);
    let t_max = t.max(s);
    let lo = shape.left_end(t.min(s));
    let pts: Vec<(f64, bool)> = ks.breakpoints().into_iter().filter(|&(p, _)| p >= lo && p <= t_max).collect();
    let p_sing = shape.exponent().map(|d| if d < 0.0 { 2.0 * d } else { d });
    let mut total = Estimate::ZERO;
    for w in pts.windows(2) {
        let (a, sa) = w[0];
        let (b, sb) = w[1];
        total = total
            + integrate_piece(prod, a, b, if sa { p_sing } else { None }, if sb { p_sing } else { None }, KERNEL_TOL)?;
    }
    if lo.is_infinite() {
        let d = match shape {
            KernelShape::Fractional { d } => d,
            _ => unreachable!(),
        };
        let start = 1.0f64.max(t_max);
        total = total + integrate_piece(prod, -start, 0.0, None, p_sing, KERNEL_TOL)?;
        total = total
            + integrate_power_tail(
                |v| shape.eval_at(t, -v, 0.0) * shape.eval_at(s, -v, 0.0),
                start,
                2.0 * (1.0 - d),
                KERNEL_TOL,
            )?;
    }
    Ok(total.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capped_kernel_branches() {
        let k = KernelShape::Capped { d: 0.3, c: 1.0 };
        // 0 < u < t with t − u ≤ c
        assert!((k.eval(0.4, 1.0) - 0.6f64.powf(0.3) / 0.3).abs() < 1e-14);
        assert_eq!(k.eval(1.2, 1.0), 0.0);
        assert_eq!(k.eval(-1.1, 1.0), 0.0);
        // u < 0 inside (−c, 0)
        let v = k.eval(-0.25, 1.0);
        assert!((v - (1.0f64.powf(0.3) - 0.25f64.powf(0.3)) / 0.3).abs() < 1e-14);
    }

    #[test]
    fn flat_kernel_and_c18() {
        // ∫ 𝓗(u, 1)² du for the β = 0 kernel reproduces C_18(c).
        for &c in &[0.5, 1.0, 2.0] {
            let k = KernelShape::Capped { d: 1.0, c };
            let v = kernel_inner_product(k, 1.0, 1.0).unwrap();
            let c18 = super::super::constants::c18(c).unwrap();
            assert!((v - c18).abs() < 1e-12, "c={c}: {v} vs {c18}");
        }
    }

    #[test]
    fn fractional_l2_matches_c0_plus_c3() {
        let beta = 0.7;
        let k = KernelShape::Fractional { d: 1.0 - beta };
        let v = kernel_inner_product(k, 1.0, 1.0).unwrap();
        let c0 = super::super::constants::c0(beta).unwrap();
        let c3 = 1.0 / ((1.0 - beta) * (1.0 - beta) * (3.0 - 2.0 * beta));
        assert!(((v - (c0 + c3)) / v).abs() < 1e-9, "{v} vs {}", c0 + c3);
    }

    #[test]
    fn indicator_integrals() {
        let ks = KernelSum::single(KernelShape::Indicator { level: 2.0 }, 0.7);
        let (a, s) = ks.alpha_integrals(1.5).unwrap();
        assert!((a - 2f64.powf(1.5) * 0.7).abs() < 1e-12);
        assert!((s - a).abs() < 1e-12);
    }
}
