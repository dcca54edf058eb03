//! Power-law filters `a_i = i^{-β}` and their truncation at lag `λ(n)`.

use crate::error::{domain, usage, Error, Result};
use crate::special::{power_tail_sum, zeta, KahanSum};

/// Largest truncation lag we are willing to materialize.
pub const MAX_LAG: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dependence {
    /// `0 < β < 1`, non-summable coefficients.
    Lrd,
    /// `β > 1` with `Σ a_i ≠ 0`.
    Srd,
    /// `β > 1` with `a_0` chosen so that `Σ a_i = 0`.
    Nd,
    /// `a_i = 1` for all `i` (the `β = 0` filter).
    Flat,
    /// `a_0 = 1` and nothing else; behaves as a short-memory filter.
    Iid,
}

impl Dependence {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lrd => "LRD",
            Self::Srd => "SRD",
            Self::Nd => "ND",
            Self::Flat => "flat",
            Self::Iid => "iid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    beta: f64,
    dependence: Dependence,
    a0: f64,
}

/// `a_0 = −Σ_{i≥1} i^{-β}`, making the filter sum to zero.
pub fn nd_zero_sum_constant(beta: f64) -> Result<f64> {
    if !(beta > 1.0) {
        return domain(format!("sum of i^-beta diverges for beta={beta}"));
    }
    Ok(-zeta(beta)?)
}

impl FilterSpec {
    pub fn lrd(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return domain(format!("LRD filter needs 0 < beta < 1, got {beta}"));
        }
        Ok(Self { beta, dependence: Dependence::Lrd, a0: 1.0 })
    }

    pub fn srd(beta: f64) -> Result<Self> {
        Self::srd_with_a0(beta, 1.0)
    }

    pub fn srd_with_a0(beta: f64, a0: f64) -> Result<Self> {
        if !(beta > 1.0) {
            return domain(format!("SRD filter needs beta > 1, got {beta}"));
        }
        let spec = Self { beta, dependence: Dependence::Srd, a0 };
        if spec.full_sum().map_or(true, |s| s.abs() < 1e-12) {
            return domain("SRD filter with zero total sum is the ND case");
        }
        Ok(spec)
    }

    pub fn nd(beta: f64) -> Result<Self> {
        let a0 = nd_zero_sum_constant(beta)?;
        Ok(Self { beta, dependence: Dependence::Nd, a0 })
    }

    pub fn flat() -> Self {
        Self { beta: 0.0, dependence: Dependence::Flat, a0: 1.0 }
    }

    pub fn iid() -> Self {
        Self { beta: f64::INFINITY, dependence: Dependence::Iid, a0: 1.0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dependence(&self) -> Dependence {
        self.dependence
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    #[inline]
    pub fn coefficient(&self, i: u64) -> f64 {
        if i == 0 {
            return self.a0;
        }
        match self.dependence {
            Dependence::Iid => 0.0,
            Dependence::Flat => 1.0,
            _ => (i as f64).powf(-self.beta),
        }
    }

    /// `Σ_{i≥0} a_i` when it converges.
    pub fn full_sum(&self) -> Option<f64> {
        match self.dependence {
            Dependence::Srd => zeta(self.beta).ok().map(|z| self.a0 + z),
            Dependence::Nd => Some(0.0),
            Dependence::Iid => Some(self.a0),
            Dependence::Lrd | Dependence::Flat => None,
        }
    }

    /// `Σ_{i>k} a_i` for summable filters.
    pub fn tail_sum(&self, k: u64) -> Result<f64> {
        match self.dependence {
            Dependence::Srd | Dependence::Nd => power_tail_sum(self.beta, k + 1),
            Dependence::Iid => Ok(0.0),
            _ => Err(Error::Domain(format!("{} filter is not summable", self.dependence.name()))),
        }
    }

    /// Admissibility for the Gaussian limit theory.
    pub fn check_gaussian(&self) -> Result<()> {
        let b = self.beta;
        let ok = match self.dependence {
            Dependence::Lrd => b > 0.5 && b < 1.0,
            Dependence::Srd => b > 1.0,
            Dependence::Nd => b > 1.0 && b < 1.5,
            Dependence::Flat | Dependence::Iid => true,
        };
        if ok {
            Ok(())
        } else {
            usage(format!("{} filter with beta={b} has no Gaussian limit", self.dependence.name()))
        }
    }

    /// Admissibility for the α-stable limit theory.
    pub fn check_stable(&self, alpha: f64) -> Result<()> {
        let b = self.beta;
        let ok = match self.dependence {
            Dependence::Lrd => b > 1.0 / alpha && b < 1.0,
            Dependence::Srd => b > 1.0,
            Dependence::Nd => b > 1f64.max(1.0 / alpha) && b < 1.0 + 1.0 / alpha,
            Dependence::Iid => true,
            Dependence::Flat => false,
        };
        if ok {
            Ok(())
        } else {
            usage(format!("{} filter with beta={b} has no stable limit for alpha={alpha}", self.dependence.name()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaperRegime {
    /// `γ1 < 1`
    Strong,
    /// `γ1 > 1`
    Weak,
    /// `γ1 = 1`
    Moderate,
}

impl TaperRegime {
    pub fn of(gamma1: f64) -> Self {
        if gamma1 == 1.0 {
            Self::Moderate
        } else if gamma1 < 1.0 {
            Self::Strong
        } else {
            Self::Weak
        }
    }
}

/// Filter truncated at `λ(n) = ⌊c·n^{γ1}⌋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaperedFilter {
    base: FilterSpec,
    gamma1: f64,
    c: f64,
    n: u64,
    lambda: u64,
}

/// `⌊c·n^{γ1}⌋`, nudged up by a few ulps so exact powers are not lost to rounding.
pub fn truncation_lag(c: f64, gamma1: f64, n: u64) -> f64 {
    let x = c * (n as f64).powf(gamma1);
    (x * (1.0 + 4.0 * f64::EPSILON)).floor()
}

impl TaperedFilter {
    /// `c` is replaced by 1 unless `γ1 = 1`.
    pub fn new(base: FilterSpec, gamma1: f64, c: f64, n: u64) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma1.is_finite()) {
            return domain(format!("gamma1={gamma1} must be positive"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("c={c} must be positive"));
        }
        if n == 0 {
            return domain("n must be at least 1");
        }
        let c = if gamma1 == 1.0 { c } else { 1.0 };
        let lag = truncation_lag(c, gamma1, n);
        if lag < 1.0 {
            return domain(format!("truncation lag c*n^gamma1 = {lag} is below 1"));
        }
        if lag > MAX_LAG as f64 {
            return Err(Error::Size(format!("truncation lag {lag:e} exceeds {MAX_LAG}")));
        }
        Ok(Self { base, gamma1, c, n, lambda: lag as u64 })
    }

    pub fn base(&self) -> &FilterSpec {
        &self.base
    }
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn lambda(&self) -> u64 {
        self.lambda
    }
    pub fn regime(&self) -> TaperRegime {
        TaperRegime::of(self.gamma1)
    }

    #[inline]
    pub fn coefficient(&self, i: u64) -> f64 {
        if i > self.lambda {
            0.0
        } else {
            self.base.coefficient(i)
        }
    }

    /// `P[x] = Σ_{l=0}^{x} ā_l` for `x = 0..=λ`.
    pub fn prefix_sums(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.lambda as usize + 1);
        let mut acc = KahanSum::new();
        for i in 0..=self.lambda {
            acc.add(self.base.coefficient(i));
            out.push(acc.value());
        }
        out
    }

    /// `Σ_{i=0}^{λ} |ā_i|`.
    pub fn abs_sum(&self) -> f64 {
        (0..=self.lambda).map(|i| self.base.coefficient(i).abs()).collect::<KahanSum>().value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_examples() {
        let lrd = FilterSpec::lrd(0.7).unwrap();
        assert!((lrd.coefficient(2) - 0.615_572_206_672_458_5).abs() < 1e-15);
        assert_eq!(lrd.coefficient(0), 1.0);
        let nd = FilterSpec::nd(1.25).unwrap();
        assert!((nd.coefficient(0) + 4.595_111_825_842_94).abs() < 1e-11);
    }

    #[test]
    fn zero_sum_constant() {
        assert!((nd_zero_sum_constant(2.0).unwrap() + std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
        assert_eq!(nd_zero_sum_constant(f64::INFINITY).unwrap(), -1.0);
        assert!(nd_zero_sum_constant(1.0).is_err());
        assert!(nd_zero_sum_constant(0.8).is_err());
    }

    #[test]
    fn truncation_examples() {
        let srd = FilterSpec::srd(1.2).unwrap();
        let tf = TaperedFilter::new(srd, 0.5, 1.0, 100).unwrap();
        assert_eq!(tf.lambda(), 10);
        assert_eq!(tf.coefficient(11), 0.0);
        assert_eq!(tf.coefficient(10), srd.coefficient(10));
        let tf = TaperedFilter::new(srd, 1.0, 0.5, 10).unwrap();
        assert_eq!(tf.lambda(), 5);
        assert_eq!(tf.coefficient(3), 3f64.powf(-1.2));
    }

    #[test]
    fn c_is_forced_to_one_off_the_moderate_regime() {
        let tf = TaperedFilter::new(FilterSpec::lrd(0.7).unwrap(), 1.5, 3.0, 16).unwrap();
        assert_eq!(tf.c(), 1.0);
        assert_eq!(tf.lambda(), 64);
        assert_eq!(tf.regime(), TaperRegime::Weak);
    }

    #[test]
    fn lag_rounding_keeps_exact_powers() {
        assert_eq!(truncation_lag(1.0, 1.5, 1 << 14), (1u64 << 21) as f64);
        assert_eq!(truncation_lag(1.0, 0.5, 10_000), 100.0);
    }

    #[test]
    fn nd_partial_sum_identity() {
        let nd = FilterSpec::nd(1.25).unwrap();
        for &k in &[1u64, 10, 100] {
            let head: f64 = (0..=k).map(|i| nd.coefficient(i)).sum();
            let tail = nd.tail_sum(k).unwrap();
            assert!((head + tail).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn admissibility() {
        assert!(FilterSpec::lrd(0.4).unwrap().check_gaussian().is_err());
        assert!(FilterSpec::lrd(0.7).unwrap().check_gaussian().is_ok());
        assert!(FilterSpec::nd(1.6).unwrap().check_gaussian().is_err());
        assert!(FilterSpec::lrd(0.6).unwrap().check_stable(1.5).is_err());
        assert!(FilterSpec::lrd(0.8).unwrap().check_stable(1.5).is_ok());
        assert!(FilterSpec::nd(1.5).unwrap().check_stable(1.5).is_ok());
        assert!(FilterSpec::nd(1.7).unwrap().check_stable(1.5).is_err());
    }

    #[test]
    fn prefix_sums_match_direct() {
        let tf = TaperedFilter::new(FilterSpec::lrd(0.7).unwrap(), 1.0, 1.0, 50).unwrap();
        let p = tf.prefix_sums();
        assert_eq!(p.len(), 51);
        let direct: f64 = (0..=50).map(|i| tf.coefficient(i)).sum();
        assert!((p[50] - direct).abs() < 1e-12);
    }
}
