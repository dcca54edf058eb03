//! Constants of the Gaussian limits and the variance functions `W^(j)`.
//!
//! Every constant is an outer integral of a squared elementary inner
//! integral, with `z = c/t` and `d = 1 − β`:
//!
//! ```text
//! G(y)       = ∫_0^1 (x+y)^{-β} dx        = ((1+y)^d − y^d)/d
//! C_0        = ∫_0^∞ G(y)² dy
//! C_1        = ∫_0^{z−1} G(y)² dy                         t ≤ c
//! C_2        = ∫_{z−1}^{z} ((z^d − y^d)/d)² dy              t ≤ c
//! C_3 = C_12 = ∫_0^1 ((1−y)^d/d)² dy
//! C_5 = C_15 = ∫_0^{1−z} (z^d/d)² dy                        t ≥ c
//! C_6 = C_14 = ∫_{1−z}^{1} ((1−y)^d/d)² dy                  t ≥ c
//! C_7        = ∫_0^{z} ((z^d − y^d)/d)² dy
//! C_4 = C_1+C_2+C_3,  C_8 = C_5+C_6+C_7,  C_9 = C_4 | C_8,  C_10 = C_9(t)/C_9(1)
//! C_11 = C_1+C_2+C_12, C_13 = C_7+C_14+C_15, C_16 = C_11 | C_13, C_17 = C_16(t)/C_16(1)
//! C_18 = c² − c³/3 (c ≤ 1), c − 1/3 (c > 1)
//! C_19 = c(1 − t/(3c))/C_18 (t ≤ c),  C_20 = c²(1 − c/(3t))/C_18 (t > c)
//! ```
//!
//! Outer integrals go through [`crate::quadrature`]; inner ones are closed.

use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_kronrod, integrate_piece, integrate_power_tail, Estimate, Tolerance};

pub(crate) const CONST_TOL: Tolerance = Tolerance::new(1e-300, 1e-12);

/// `a^d − b^d` without cancellation when `a ≈ b`; `b = 0` reads `0^d = 0`.
#[inline]
pub(crate) fn pow_diff(a: f64, b: f64, d: f64) -> f64 {
    if b <= 0.0 {
        return a.powf(d);
    }
    let r = (a - b) / b;
    if r.abs() < 0.5 {
        b.powf(d) * (d * r.ln_1p()).exp_m1()
    } else {
        a.powf(d) - b.powf(d)
    }
}

/// `(b + gap)^d − b^d` with the gap supplied exactly.
#[inline]
pub(crate) fn pow_gap(b: f64, gap: f64, d: f64) -> f64 {
    if b <= 0.0 {
        return gap.powf(d);
    }
    let r = gap / b;
    if r.abs() < 0.5 {
        b.powf(d) * (d * r.ln_1p()).exp_m1()
    } else {
        (b + gap).powf(d) - b.powf(d)
    }
}

/// `∫_0^1 (x+y)^{-β} dx`.
#[inline]
fn g_inner(y: f64, d: f64) -> f64 {
    pow_gap(y, 1.0, d) / d
}

/// Exponent of `G(y)²` at `y = 0`: a `y^d` kink for `d > 0`, a `y^{2d}` blow-up for `d < 0`.
fn origin_exponent(d: f64) -> f64 {
    if d < 0.0 {
        2.0 * d
    } else {
        d
    }
}

fn check_beta(id: u8, beta: f64) -> Result<()> {
    let ok = match id {
        0 => beta > 0.5 && beta < 1.5 && beta != 1.0,
        _ => beta > 0.0 && beta < 1.5 && beta != 1.0,
    };
    if ok {
        Ok(())
    } else {
        domain(format!("C_{id} undefined for beta={beta}"))
    }
}

fn check_tc(id: u8, t: f64, c: f64, need: Option<bool>) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("C_{id} needs t > 0, got {t}"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("C_{id} needs c > 0, got {c}"));
    }
    match need {
        Some(true) if t > c => domain(format!("C_{id} is defined for t <= c (t={t}, c={c})")),
        Some(false) if t < c => domain(format!("C_{id} is defined for t >= c (t={t}, c={c})")),
        _ => Ok(()),
    }
}

/// `∫_a^b G(y)² dy` for `0 ≤ a ≤ b`.
fn g_squared(a: f64, b: f64, d: f64) -> Result<Estimate> {
    let f = |y: f64| g_inner(y, d).powi(2);
    let mut total = Estimate::ZERO;
    let split = b.min(1.0).max(a);
    if split > a {
        let pa = (a == 0.0).then(|| origin_exponent(d));
        total = total + integrate_piece(|base, off| f(base + off), a, split, pa, None, CONST_TOL)?;
    }
    if b > split {
        if b.is_infinite() {
            total = total + integrate_power_tail(f, split, 2.0 * (1.0 - d), CONST_TOL)?;
        } else {
            // long algebraic stretch: integrate in log y
            total = total
                + gauss_kronrod(
                    |s| {
                        let y = s.exp();
                        f(y) * y
                    },
                    split.ln(),
                    b.ln(),
                    CONST_TOL,
                )?;
        }
    }
    Ok(total)
}

pub fn c0(beta: f64) -> Result<f64> {
    check_beta(0, beta)?;
    Ok(g_squared(0.0, f64::INFINITY, 1.0 - beta)?.value)
}

fn c1(z: f64, d: f64) -> Result<f64> {
    Ok(g_squared(0.0, (z - 1.0).max(0.0), d)?.value)
}

fn c2(z: f64, d: f64) -> Result<f64> {
    let lo = z - 1.0;
    let pa = (lo == 0.0).then(|| origin_exponent(d));
    let est = integrate_piece(
        |base, off| {
            // distance below z is exact when measured from the right end
            let v = if base == z { pow_gap(z + off, -off, d) } else { pow_diff(z, base + off, d) };
            (v / d).powi(2)
        },
        lo,
        z,
        pa,
        None,
        CONST_TOL,
    )?;
    Ok(est.value)
}

/// `∫_lo^1 ((1−y)^d/d)² dy`, used for C_3/C_12 (lo = 0) and C_6/C_14.
fn c3_like(lo: f64, d: f64) -> Result<f64> {
    let est = integrate_piece(
        |base, off| {
            let w = if base == 1.0 { -off } else { 1.0 - (base + off) };
            (w.powf(d) / d).powi(2)
        },
        lo,
        1.0,
        None,
        Some(2.0 * d),
        CONST_TOL,
    )?;
    Ok(est.value)
}

fn c5(z: f64, d: f64) -> Result<f64> {
    let v = z.powf(d) / d;
    Ok(gauss_kronrod(|_| v * v, 0.0, 1.0 - z, CONST_TOL)?.value)
}

fn c7(z: f64, d: f64) -> Result<f64> {
    let est = integrate_piece(
        |base, off| {
            let v = if base == z { pow_gap(z + off, -off, d) } else { pow_diff(z, off, d) };
            (v / d).powi(2)
        },
        0.0,
        z,
        Some(origin_exponent(d)),
        None,
        CONST_TOL,
    )?;
    Ok(est.value)
}

pub fn c18(c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("C_18 needs c > 0, got {c}"));
    }
    Ok(if c <= 1.0 { c * c - c * c * c / 3.0 } else { c - 1.0 / 3.0 })
}

/// `C_id(t, β, c)` for `id ∈ 0..=20`; ids without a `t` or `β` ignore them.
pub fn constant(id: u8, t: f64, beta: f64, c: f64) -> Result<f64> {
    if id <= 17 {
        check_beta(id, beta)?;
    }
    let d = 1.0 - beta;
    match id {
        0 => c0(beta),
        1 | 2 | 4 | 11 => {
            check_tc(id, t, c, Some(true))?;
            let z = c / t;
            match id {
                1 => c1(z, d),
                2 => c2(z, d),
                _ => Ok(c1(z, d)? + c2(z, d)? + c3_like(0.0, d)?),
            }
        }
        3 | 12 => c3_like(0.0, d),
        5 | 15 => {
            check_tc(id, t, c, Some(false))?;
            c5(c / t, d)
        }
        6 | 14 => {
            check_tc(id, t, c, Some(false))?;
            c3_like(1.0 - c / t, d)
        }
        7 => {
            check_tc(id, t, c, None)?;
            c7(c / t, d)
        }
        8 | 13 => {
            check_tc(id, t, c, Some(false))?;
            let z = c / t;
            Ok(c5(z, d)? + c3_like(1.0 - z, d)? + c7(z, d)?)
        }
        9 | 16 => {
            check_tc(id, t, c, None)?;
            if t <= c {
                constant(if id == 9 { 4 } else { 11 }, t, beta, c)
            } else {
                constant(if id == 9 { 8 } else { 13 }, t, beta, c)
            }
        }
        10 | 17 => {
            let base = if id == 10 { 9 } else { 16 };
            Ok(constant(base, t, beta, c)? / constant(base, 1.0, beta, c)?)
        }
        18 => c18(c),
        19 => {
            check_tc(id, t, c, Some(true))?;
            Ok(c * (1.0 - t / (3.0 * c)) / c18(c)?)
        }
        20 => {
            check_tc(id, t, c, Some(false))?;
            Ok(c * c * (1.0 - c / (3.0 * t)) / c18(c)?)
        }
        _ => Err(Error::Domain(format!("no constant C_{id}"))),
    }
}

/// Self-similarity index of the limit, where there is one.
pub fn hurst(j: u8, beta: f64) -> Option<f64> {
    match j {
        1 | 2 | 3 | 5 | 8 | 10 => Some(0.5),
        4 | 6 | 7 | 9 => Some(1.5 - beta),
        11 => Some(1.0),
        _ => None,
    }
}

/// Exponent `e` in `A_n² ∝ n^e`.
pub fn normalizer_exponent(j: u8, beta: f64, gamma1: f64) -> Option<f64> {
    Some(match j {
        1 | 3 => 1.0 + 2.0 * gamma1 * (1.0 - beta),
        2 | 5 | 8 => 1.0,
        4 | 6 | 7 | 9 => 3.0 - 2.0 * beta,
        10 => 2.0 * gamma1 + 1.0,
        11 => 2.0 + gamma1,
        12 => 3.0,
        _ => return None,
    })
}

/// Limit variance `W^(j)(t)`; `W^(j)(1) = 1` for every case.
pub fn limit_variance(j: u8, t: f64, beta: f64, c: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("t={t} must be non-negative"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    match j {
        1 | 2 | 3 | 5 | 8 | 10 => Ok(t),
        4 | 6 => Ok(t.powf(3.0 - 2.0 * beta)),
        7 => Ok(t.powf(3.0 - 2.0 * beta) * constant(10, t, beta, c)?),
        9 => Ok(t.powf(3.0 - 2.0 * beta) * constant(17, t, beta, c)?),
        11 | 12 => limit_variance_prop3(j, t, c),
        _ => domain(format!("case index j={j} outside 1..=12")),
    }
}

/// Variances of the constant-filter cases `j = 10, 11, 12`.
pub fn limit_variance_prop3(j: u8, t: f64, c: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("t={t} must be positive"));
    }
    match j {
        10 => Ok(t),
        11 => Ok(t * t),
        12 => {
            if t <= c {
                Ok(t * t * constant(19, t, 0.0, c)?)
            } else {
                Ok(t * constant(20, t, 0.0, c)?)
            }
        }
        _ => domain(format!("j={j} is not a constant-filter case")),
    }
}
