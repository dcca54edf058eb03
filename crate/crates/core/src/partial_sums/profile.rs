//! The coefficient arrays `d_{n,i,t}` and the exact finite-n moments.

use super::RegimeSpec;
use crate::error::{domain, Error, Result};
use crate::filters::TaperedFilter;
use crate::special::KahanSum;

/// Largest coefficient array we materialize (1 GiB of `f64`).
pub const MAX_PROFILE_LEN: u64 = 1 << 27;

/// `d_{n,i,t}` for `i = −λ(n) ..= ⌊nt⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile {
    pub n: u64,
    pub t: f64,
    /// `⌊nt⌋`.
    pub m: u64,
    pub lambda: u64,
    /// `values[k] = d_{n, k−λ, t}`.
    pub values: Vec<f64>,
}

impl CoefficientProfile {
    pub fn i_min(&self) -> i64 {
        -(self.lambda as i64)
    }

    /// `d_{n,i,t}`; zero outside the support.
    pub fn d(&self, i: i64) -> f64 {
        let k = i + self.lambda as i64;
        if k < 0 {
            return 0.0;
        }
        self.values.get(k as usize).copied().unwrap_or(0.0)
    }

    /// `(Σ_{i≤0} d², Σ_{i≥1} d²)`.
    pub fn variance_split(&self) -> (f64, f64) {
        let split = (self.lambda as usize + 1).min(self.values.len());
        let sq = |s: &[f64]| s.iter().map(|x| x * x).collect::<KahanSum>().value();
        (sq(&self.values[..split]), sq(&self.values[split..]))
    }

    /// `Σ_i d_{n,i,t}`.
    pub fn sum(&self) -> f64 {
        self.values.iter().copied().collect::<KahanSum>().value()
    }
}

/// `⌊nt⌋` with the same upward nudge as the truncation lag.
pub(crate) fn floor_nt(n: u64, t: f64) -> u64 {
    (n as f64 * t * (1.0 + 4.0 * f64::EPSILON)).floor() as u64
}

/// `P(x)` extended by `P(x) = P(λ)` above `λ` and `0` below zero.
#[inline]
pub(crate) fn prefix_at(prefix: &[f64], x: i64) -> f64 {
    if x < 0 {
        0.0
    } else {
        prefix[(x as usize).min(prefix.len() - 1)]
    }
}

pub(crate) fn profile_from_prefix(filter: &TaperedFilter, prefix: &[f64], t: f64) -> Result<CoefficientProfile> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t={t} must be positive"));
    }
    let n = filter.n();
    let lambda = filter.lambda();
    let m = floor_nt(n, t);
    let len = lambda + m + 1;
    if len > MAX_PROFILE_LEN {
        return Err(Error::Size(format!("coefficient array of {len} entries exceeds {MAX_PROFILE_LEN}")));
    }
    let values =
        (-(lambda as i64)..=m as i64).map(|i| prefix_at(prefix, m as i64 - i) - prefix_at(prefix, -i)).collect();
    Ok(CoefficientProfile { n, t, m, lambda, values })
}

pub fn coefficient_profile(regime: &RegimeSpec, n: u64, t: f64) -> Result<CoefficientProfile> {
    let filter = regime.tapered(n)?;
    profile_from_prefix(&filter, &filter.prefix_sums(), t)
}

/// `innovation_var · Σ_i d²`.
pub fn exact_variance(profile: &CoefficientProfile, innovation_var: f64) -> f64 {
    let (v1, v2) = profile.variance_split();
    innovation_var * (v1 + v2)
}

/// `innovation_var · Σ_i d_{n,i,t} d_{n,i,s}`.
pub fn exact_covariance(p1: &CoefficientProfile, p2: &CoefficientProfile, innovation_var: f64) -> Result<f64> {
    if p1.n != p2.n || p1.lambda != p2.lambda {
        return Err(Error::Usage(format!(
            "profiles differ in (n, lambda): ({}, {}) vs ({}, {})",
            p1.n, p1.lambda, p2.n, p2.lambda
        )));
    }
    // both arrays start at i = −λ
    let s = p1.values.iter().zip(&p2.values).map(|(a, b)| a * b).collect::<KahanSum>().value();
    Ok(innovation_var * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterSpec;
    use crate::innovations::InnovationSpec;
    use crate::partial_sums::CaseIndex;

    fn iid_regime() -> RegimeSpec {
        let case = CaseIndex::new(2).unwrap();
        RegimeSpec::new(case, FilterSpec::iid(), 0.5, 1.0, InnovationSpec::gaussian()).unwrap()
    }

    #[test]
    fn iid_profile() {
        let p = coefficient_profile(&iid_regime(), 2, 1.0).unwrap();
        // λ = ⌊√2⌋ = 1, i ∈ {−1, 0, 1, 2}
        assert_eq!(p.values, vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(exact_variance(&p, 1.0), 2.0);
        assert_eq!(p.d(-2), 0.0);
        assert_eq!(p.d(3), 0.0);
    }

    #[test]
    fn iid_covariance() {
        let r = iid_regime();
        let p1 = coefficient_profile(&r, 2, 1.0).unwrap();
        let p2 = coefficient_profile(&r, 2, 2.0).unwrap();
        assert_eq!(exact_covariance(&p1, &p2, 1.0).unwrap(), 2.0);
        assert_eq!(exact_covariance(&p1, &p1, 1.0).unwrap(), exact_variance(&p1, 1.0));
        let p3 = coefficient_profile(&r, 3, 1.0).unwrap();
        assert!(matches!(exact_covariance(&p1, &p3, 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn last_coefficient_is_a0() {
        let r = RegimeSpec::defaults(5).unwrap();
        let p = coefficient_profile(&r, 100, 1.0).unwrap();
        assert!(p.lambda >= p.m);
        assert_eq!(p.d(p.m as i64), 1.0);
        assert_eq!(p.d(-(p.lambda as i64) - 1), 0.0);
    }

    #[test]
    fn brute_force_definition() {
        let r = RegimeSpec::defaults(1).unwrap();
        let f = r.tapered(50).unwrap();
        let p = coefficient_profile(&r, 50, 0.7).unwrap();
        for i in p.i_min()..=p.m as i64 {
            let lo = i.max(1);
            let direct: f64 = (lo..=p.m as i64).map(|k| f.coefficient((k - i) as u64)).sum();
            assert!((p.d(i) - direct).abs() < 1e-12, "i={i}");
        }
    }
}
