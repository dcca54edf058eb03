//! Riemann zeta on (1, ∞), power-sum tails and compensated summation.

use crate::error::{domain, Result};

/// Terms summed directly before the Euler–Maclaurin tail takes over.
pub const ZETA_DIRECT_TERMS: u64 = 1_000_000;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Euler–Maclaurin estimate of `Σ_{i≥n} i^{-β}` for `n` large enough that the
/// Bernoulli series is far inside its asymptotic range.
fn em_tail(beta: f64, n: f64) -> f64 {
    let b = beta;
    let np = n.powf(-b);
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    n * np / (b - 1.0) + 0.5 * np + np * inv * b / 12.0 - np * inv * inv2 * b * (b + 1.0) * (b + 2.0) / 720.0
        + np * inv * inv2 * inv2 * b * (b + 1.0) * (b + 2.0) * (b + 3.0) * (b + 4.0) / 30240.0
}

/// `Σ_{i ≥ from} i^{-β}` for `β > 1`, `from ≥ 1`.
pub fn power_tail_sum(beta: f64, from: u64) -> Result<f64> {
    if !(beta > 1.0) {
        return domain(format!("power sum diverges for beta={beta} <= 1"));
    }
    if from == 0 {
        return domain("power sum index starts at 1");
    }
    if beta.is_infinite() {
        return Ok(if from == 1 { 1.0 } else { 0.0 });
    }
    let cut = from.max(ZETA_DIRECT_TERMS);
    // Sum small terms first.
    let mut acc = KahanSum::new();
    acc.add(em_tail(beta, cut as f64));
    for i in (from..cut).rev() {
        acc.add((i as f64).powf(-beta));
    }
    Ok(acc.value())
}

/// Riemann zeta `ζ(β)` for `β > 1`.
pub fn zeta(beta: f64) -> Result<f64> {
    power_tail_sum(beta, 1)
}

/// Gamma function on the reals (poles excluded by the callers).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Dot product with four independent accumulators.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_two_is_basel() {
        let z = zeta(2.0).unwrap();
        assert!((z - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13, "{z}");
    }

    #[test]
    fn zeta_four() {
        let z = zeta(4.0).unwrap();
        assert!((z - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn tail_consistent_with_head() {
        let beta = 1.37;
        let head: f64 = (1..=10u64).map(|i| (i as f64).powf(-beta)).sum();
        let lhs = zeta(beta).unwrap();
        let rhs = head + power_tail_sum(beta, 11).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn em_tail_alone_is_accurate_far_out() {
        // Σ_{i ≥ 2e6} versus Σ_{i ≥ 1e6} minus the block in between.
        let beta = 1.25;
        let a = em_tail(beta, 1e6);
        let block: f64 = compensated_sum((1_000_000u64..2_000_000).map(|i| (i as f64).powf(-beta)));
        let b = em_tail(beta, 2e6);
        assert!((a - block - b).abs() < 1e-14, "{}", a - block - b);
    }

    #[test]
    fn divergent_sum_rejected() {
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
