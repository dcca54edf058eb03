//! Adaptive Gauss–Kronrod quadrature with endpoint-singularity maps.
//!
//! The integrands in this crate are power-law kernels: integrable blow-ups
//! like `δ^p` (p > −1) at breakpoints, kinks like `δ^e` (e > 0), and slow
//! algebraic tails. Three maps handle them:
//!
//! * [`integrate_offset`] integrates `∫_0^L f(δ) dδ` after `δ = L·s^q`, with
//!   `q` chosen from the leading exponent so the mapped integrand is smooth.
//! * [`integrate_piece`] splits an interval at its midpoint and hands each
//!   half to [`integrate_offset`] measured from its own endpoint. The
//!   integrand receives `(base, offset)` instead of `u`, so the distance to a
//!   singular breakpoint is exact even when it is far below `ε·|u|`.
//! * [`integrate_power_tail`] maps `[a, ∞)` onto `(0, 1]` for integrands
//!   decaying like `x^{-p}`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_044_298_322,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Absolute and relative accuracy goals; an estimate is accepted once its
/// error is below either.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn goal(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-14, 1e-11)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value + rhs.value, error: self.error + rhs.error }
    }
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, error: 0.0 };
}

const MAX_INTERVALS: usize = 4000;

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    for (k, (&x, &w)) in XGK[..10].iter().zip(WGK[..10].iter()).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        kron += w * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    let value = kron * half;
    let err = ((kron - gauss) * half).abs();
    // Floor at rounding level so flat integrands do not subdivide forever.
    let floor = 50.0 * f64::EPSILON * (value.abs());
    (value, err.max(floor))
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive G10/K21 on a finite interval.
///
/// The segment with the largest error is bisected until the summed error
/// meets the tolerance.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("finite interval required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate::ZERO);
    }
    let (v, e) = gk21(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    while total_err > tol.goal(total) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] stalled at error {total_err:e} (value {total:e})"
            )));
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            return Err(Error::Numerical(format!("quadrature on [{a}, {b}] hit float resolution near {mid}")));
        }
        let (v1, e1) = gk21(&mut f, seg.a, mid);
        let (v2, e2) = gk21(&mut f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        if heap.len() % 64 == 0 {
            // Re-sum to shed accumulated cancellation in the running totals.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Estimate { value, error })
}

/// Power of the endpoint map for a leading exponent `p`.
fn map_power(p: f64) -> f64 {
    if p >= 6.0 || (p >= 0.0 && p.fract() == 0.0) {
        return 1.0;
    }
    (3.0 / (p + 1.0)).ceil().clamp(2.0, 40.0)
}

/// `∫_0^len f(δ) dδ` where `f(δ)` behaves like `δ^p` (p > −1) near zero, or
/// has a `δ^p` kink for non-integer `p > 0`.
pub fn integrate_offset<F: FnMut(f64) -> f64>(mut f: F, len: f64, p: f64, tol: Tolerance) -> Result<Estimate> {
    if p <= -1.0 {
        return Err(Error::Domain(format!("endpoint exponent {p} is not integrable")));
    }
    if len == 0.0 {
        return Ok(Estimate::ZERO);
    }
    let q = map_power(p);
    if q == 1.0 {
        return gauss_kronrod(f, 0.0, len, tol);
    }
    gauss_kronrod(
        |s| {
            let sq1 = s.powf(q - 1.0);
            let delta = len * sq1 * s;
            if delta == 0.0 {
                return 0.0;
            }
            let y = f(delta) * len * q * sq1;
            if y.is_finite() {
                y
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_a^b f` where the integrand is given as `f(base, offset)` with
/// `u = base + offset` and `base` one of the two endpoints.
///
/// `pa`/`pb` are the leading exponents at `a`/`b`; `None` means smooth.
pub fn integrate_piece<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    pa: Option<f64>,
    pb: Option<f64>,
    tol: Tolerance,
) -> Result<Estimate> {
    if b < a {
        return Err(Error::Domain(format!("reversed interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate::ZERO);
    }
    match (pa, pb) {
        (None, None) => gauss_kronrod(|u| f(a, u - a), a, b, tol),
        (Some(p), None) => integrate_offset(|d| f(a, d), b - a, p, tol),
        (None, Some(p)) => integrate_offset(|d| f(b, -d), b - a, p, tol),
        (Some(p1), Some(p2)) => {
            let h = 0.5 * (b - a);
            let left = integrate_offset(|d| f(a, d), h, p1, tol)?;
            let right = integrate_offset(|d| f(b, -d), (b - a) - h, p2, tol)?;
            Ok(left + right)
        }
    }
}

/// `∫_a^∞ f(x) dx` for `a > 0` and `f(x) ~ x^{-p}`, `p > 1`.
///
/// Uses `x = a·w^{-1/(p-1)}`, which turns a pure power tail into a constant.
pub fn integrate_power_tail<F: FnMut(f64) -> f64>(mut f: F, a: f64, p: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a > 0.0) || !(p > 1.0) {
        return Err(Error::Domain(format!("power tail needs a > 0 and p > 1, got a={a}, p={p}")));
    }
    let k = 1.0 / (p - 1.0);
    // Corrections of relative order 1/x become w^k at w = 0.
    integrate_offset(
        |w| {
            let x = a * w.powf(-k);
            if !x.is_finite() {
                return 0.0;
            }
            let y = f(x) * a * k * w.powf(-k - 1.0);
            if y.is_finite() {
                y
            } else {
                0.0
            }
        },
        1.0,
        k.min(1.0),
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerance = Tolerance::new(1e-15, 1e-12);

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn polynomials_are_exact() {
        let est = gauss_kronrod(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, TOL).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!(close(est.value, exact, 1e-14), "{} vs {exact}", est.value);
    }

    #[test]
    fn oscillatory_integrand() {
        // zero integral: only an absolute goal is meaningful
        let est = gauss_kronrod(|x| (50.0 * x).sin(), 0.0, std::f64::consts::PI, Tolerance::new(1e-12, 0.0)).unwrap();
        assert!(est.value.abs() < 1e-12);
    }

    #[test]
    fn strong_endpoint_singularity() {
        // ∫_0^1 x^{-0.9} dx = 10
        let est = integrate_offset(|x| x.powf(-0.9), 1.0, -0.9, TOL).unwrap();
        assert!(close(est.value, 10.0, 1e-11), "{}", est.value);
    }

    #[test]
    fn kink_exponent() {
        // ∫_0^2 (1 + x^{0.3})^2 dx
        let est = integrate_offset(|x| (1.0 + x.powf(0.3)).powi(2), 2.0, 0.3, TOL).unwrap();
        let exact = 2.0 + 2.0 * 2f64.powf(1.3) / 1.3 + 2f64.powf(1.6) / 1.6;
        assert!(close(est.value, exact, 1e-12));
    }

    #[test]
    fn piece_keeps_exact_distance_to_right_endpoint() {
        // ∫_0^t (t-u)^{-0.95} du = t^{0.05}/0.05, singular at a non-zero point.
        let t = 3.7;
        let est = integrate_piece(
            |base, off| {
                let d = if base == t { -off } else { t - (base + off) };
                d.powf(-0.95)
            },
            0.0,
            t,
            None,
            Some(-0.95),
            TOL,
        )
        .unwrap();
        assert!(close(est.value, t.powf(0.05) / 0.05, 1e-10), "{}", est.value);
    }

    #[test]
    fn both_ends_singular() {
        // Beta(0.5, 0.5) = π
        let est = integrate_piece(
            |base, off| {
                let (x, y) = if base == 0.0 { (off, 1.0 - off) } else { (1.0 + off, -off) };
                (x * y).powf(-0.5)
            },
            0.0,
            1.0,
            Some(-0.5),
            Some(-0.5),
            TOL,
        )
        .unwrap();
        assert!(close(est.value, std::f64::consts::PI, 1e-11));
    }

    #[test]
    fn slow_power_tail() {
        // ∫_1^∞ x^{-1.05} dx = 20
        let est = integrate_power_tail(|x| x.powf(-1.05), 1.0, 1.05, TOL).unwrap();
        assert!(close(est.value, 20.0, 1e-10), "{}", est.value);
        // ∫_2^∞ 1/(x^2 (1 + 1/x)) dx = ln(3/2)
        let est = integrate_power_tail(|x| 1.0 / (x * x + x), 2.0, 2.0, TOL).unwrap();
        assert!(close(est.value, 1.5f64.ln(), 1e-11), "{}", est.value);
    }

    #[test]
    fn rejects_non_integrable_exponent() {
        assert!(integrate_offset(|x| 1.0 / x, 1.0, -1.0, TOL).is_err());
    }
}
