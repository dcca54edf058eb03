//! Partial sums `S_n(t) = Σ_{k=1}^{⌊nt⌋} X_k` of the truncated linear process
//! `X_k = Σ_{j=0}^{λ(n)} ā_j η_{k−j}`.
//!
//! Writing `S_n(t) = Σ_i d_{n,i,t} η_i`, the coefficients are differences of
//! the filter prefix sums `P(x) = Σ_{l=0}^{min(x,λ)} ā_l` (`P(x) = 0` for
//! `x < 0`):
//!
//! ```text
//! d_{n,i,t} = P(⌊nt⌋ − i) − P(−i),   −λ(n) ≤ i ≤ ⌊nt⌋
//! ```

mod diagnostics;
mod paths;
mod profile;

pub use diagnostics::{coupling_distance, lyapunov_fraction, CouplingEstimate, CouplingMethod};
pub use paths::{simulate_normalized_replicas, simulate_partial_sum_path, PathEngine};
pub use profile::{coefficient_profile, exact_covariance, exact_variance, CoefficientProfile, MAX_PROFILE_LEN};

use crate::error::{domain, Error, Result};
use crate::filters::{Dependence, FilterSpec, TaperRegime, TaperedFilter};
use crate::innovations::{InnovationKind, InnovationSpec, TaperClass, TaperLevel};
use crate::limit_laws::{constant, normalizer_exponent, StableLimit};

/// Case index `j ∈ 1..=12`.
///
/// `1..=9` run over (strong, weak, moderate) filter truncation × (LRD, SRD,
/// ND); `10, 11, 12` are the flat filter under strong, weak and moderate
/// truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CaseIndex(u8);

impl CaseIndex {
    pub fn new(j: u8) -> Result<Self> {
        if (1..=12).contains(&j) {
            Ok(Self(j))
        } else {
            Err(Error::Usage(format!("case index j={j} outside 1..=12")))
        }
    }

    pub fn from_parts(regime: TaperRegime, dependence: Dependence) -> Result<Self> {
        let row = match regime {
            TaperRegime::Strong => 0,
            TaperRegime::Weak => 1,
            TaperRegime::Moderate => 2,
        };
        let j = match dependence {
            Dependence::Lrd => 3 * row + 1,
            Dependence::Srd | Dependence::Iid => 3 * row + 2,
            Dependence::Nd => 3 * row + 3,
            Dependence::Flat => 10 + row,
        };
        Self::new(j)
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    pub fn taper_regime(self) -> TaperRegime {
        let row = if self.0 >= 10 { self.0 - 10 } else { (self.0 - 1) / 3 };
        match row {
            0 => TaperRegime::Strong,
            1 => TaperRegime::Weak,
            _ => TaperRegime::Moderate,
        }
    }

    pub fn dependence(self) -> Dependence {
        if self.0 >= 10 {
            return Dependence::Flat;
        }
        match (self.0 - 1) % 3 {
            0 => Dependence::Lrd,
            1 => Dependence::Srd,
            _ => Dependence::Nd,
        }
    }

    /// LRD 0.7, SRD 1.2, ND 1.25, flat 0.
    pub fn default_beta(self) -> f64 {
        match self.dependence() {
            Dependence::Lrd => 0.7,
            Dependence::Srd | Dependence::Iid => 1.2,
            Dependence::Nd => 1.25,
            Dependence::Flat => 0.0,
        }
    }

    /// Strong 0.5, weak 1.5, moderate 1.
    pub fn default_gamma1(self) -> f64 {
        match self.taper_regime() {
            TaperRegime::Strong => 0.5,
            TaperRegime::Weak => 1.5,
            TaperRegime::Moderate => 1.0,
        }
    }

    /// Default filter of the case's dependence class.
    pub fn default_filter(self, beta: f64) -> Result<FilterSpec> {
        match self.dependence() {
            Dependence::Lrd => FilterSpec::lrd(beta),
            Dependence::Srd | Dependence::Iid => FilterSpec::srd(beta),
            Dependence::Nd => FilterSpec::nd(beta),
            Dependence::Flat => Ok(FilterSpec::flat()),
        }
    }
}

impl std::fmt::Display for CaseIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which limit theory applies to a regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitFamily {
    Gaussian,
    Stable,
}

/// A case together with its filter, truncation and innovations. The sample
/// size is supplied separately, so one spec serves a whole n-ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSpec {
    pub case: CaseIndex,
    pub filter: FilterSpec,
    pub gamma1: f64,
    pub c: f64,
    pub innovation: InnovationSpec,
}

impl RegimeSpec {
    pub fn new(case: CaseIndex, filter: FilterSpec, gamma1: f64, c: f64, innovation: InnovationSpec) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma1.is_finite()) {
            return domain(format!("gamma1={gamma1} must be positive"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("c={c} must be positive"));
        }
        let regime = TaperRegime::of(gamma1);
        if regime != case.taper_regime() {
            return Err(Error::Usage(format!(
                "j={case} needs {:?} truncation, gamma1={gamma1} gives {regime:?}",
                case.taper_regime()
            )));
        }
        let dep = filter.dependence();
        let want = case.dependence();
        if dep != want && !(dep == Dependence::Iid && want == Dependence::Srd) {
            return Err(Error::Usage(format!("j={case} needs a {} filter, got {}", want.name(), dep.name())));
        }
        let c = if gamma1 == 1.0 { c } else { 1.0 };
        Ok(Self { case, filter, gamma1, c, innovation })
    }

    /// Default β, γ1 and `c = 1` with standard Gaussian innovations.
    pub fn defaults(j: u8) -> Result<Self> {
        let case = CaseIndex::new(j)?;
        let filter = case.default_filter(case.default_beta())?;
        Self::new(case, filter, case.default_gamma1(), 1.0, InnovationSpec::gaussian())
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        let filter = self.case.default_filter(beta)?;
        Self::new(self.case, filter, self.gamma1, self.c, self.innovation)
    }

    pub fn with_gamma1(self, gamma1: f64) -> Result<Self> {
        Self::new(self.case, self.filter, gamma1, self.c, self.innovation)
    }

    pub fn with_c(self, c: f64) -> Result<Self> {
        Self::new(self.case, self.filter, self.gamma1, c, self.innovation)
    }

    pub fn with_innovation(self, innovation: InnovationSpec) -> Self {
        Self { innovation, ..self }
    }

    pub fn beta(&self) -> f64 {
        self.filter.beta()
    }

    pub fn tapered(&self, n: u64) -> Result<TaperedFilter> {
        TaperedFilter::new(self.filter, self.gamma1, self.c, n)
    }

    pub fn family(&self) -> Result<LimitFamily> {
        let inn = &self.innovation;
        match inn.kind {
            InnovationKind::GaussianUnit => Ok(LimitFamily::Gaussian),
            InnovationKind::Pareto | InnovationKind::CenteredPareto => Ok(LimitFamily::Stable),
            InnovationKind::TaperedPareto | InnovationKind::CenteredTaperedPareto => match inn.taper {
                Some(TaperLevel::Fixed(b)) if b.is_infinite() => Ok(LimitFamily::Stable),
                Some(TaperLevel::Fixed(_)) => Ok(LimitFamily::Gaussian),
                Some(TaperLevel::Growing { .. }) => match inn.taper_class() {
                    Some(TaperClass::Hard) => Ok(LimitFamily::Gaussian),
                    Some(TaperClass::Soft) => Ok(LimitFamily::Stable),
                    _ => Err(Error::Usage("intermediate tapering has no limit theory here".into())),
                },
                None => Err(Error::Usage("tapered innovations need a taper level".into())),
            },
        }
    }

    pub fn stable_limit(&self) -> Result<StableLimit> {
        let alpha = self.innovation.alpha.ok_or_else(|| Error::Usage("stable limit needs a tail index".into()))?;
        StableLimit::new(self.case.value(), alpha.value(), &self.filter, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizerMode {
    /// `A_n² = Var S_n(1)`, computed from the coefficients.
    #[default]
    Exact,
    /// Leading-order closed form `C·n^e`.
    Asymptotic,
}

/// Normalizing constant `A_n` (or `Ā_n` for tapered innovations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub case: CaseIndex,
    pub n: u64,
    pub value: f64,
    /// Whether `value` includes the innovation standard deviation.
    pub innovation_scaled: bool,
}

/// Constant `C` in the Gaussian `A_n² ≈ C·n^e`.
pub fn gaussian_normalizer_constant(regime: &RegimeSpec) -> Result<f64> {
    let beta = regime.beta();
    let c = regime.c;
    match regime.case.value() {
        1 => Ok((1.0 - beta).powi(-2)),
        3 => Ok((beta - 1.0).powi(-2)),
        2 | 5 | 8 => {
            let s = regime.filter.full_sum().ok_or_else(|| Error::Domain("filter sum diverges".into()))?;
            Ok(s * s)
        }
        4 => Ok(constant(0, 1.0, beta, c)? + constant(3, 1.0, beta, c)?),
        6 => Ok(constant(0, 1.0, beta, c)? + constant(12, 1.0, beta, c)?),
        7 => constant(9, 1.0, beta, c),
        9 => constant(16, 1.0, beta, c),
        10 | 11 => Ok(1.0),
        _ => constant(18, 1.0, 0.0, c),
    }
}

pub fn normalizer(regime: &RegimeSpec, n: u64, mode: NormalizerMode) -> Result<Normalizer> {
    let j = regime.case.value();
    let law = regime.innovation.at(n)?;
    match regime.family()? {
        LimitFamily::Gaussian => {
            let var = law
                .variance()?
                .ok_or_else(|| Error::Usage("Gaussian normalizer needs finite innovation variance".into()))?;
            let scaled = law.kind.is_tapered();
            let a2 = match mode {
                NormalizerMode::Exact => {
                    let p = coefficient_profile(regime, n, 1.0)?;
                    exact_variance(&p, var)
                }
                NormalizerMode::Asymptotic => {
                    let e = normalizer_exponent(j, regime.beta(), regime.gamma1).expect("valid case");
                    gaussian_normalizer_constant(regime)? * (n as f64).powf(e) * var
                }
            };
            if !(a2 > 0.0 && a2.is_finite()) {
                return Err(Error::Numerical(format!("normalizer A_n^2 = {a2} is not positive")));
            }
            Ok(Normalizer { case: regime.case, n, value: a2.sqrt(), innovation_scaled: scaled })
        }
        LimitFamily::Stable => {
            let alpha = regime.innovation.alpha.expect("stable family has alpha").value();
            let nf = n as f64;
            let z = match j {
                1 | 3 => nf.powf(regime.gamma1 * (1.0 - regime.beta())),
                2 | 5 | 8 => 1.0,
                4 | 6 | 7 | 9 => nf.powf(1.0 - regime.beta()),
                _ => return Err(Error::Usage(format!("no stable normalizer for j={j}"))),
            };
            Ok(Normalizer { case: regime.case, n, value: nf.powf(1.0 / alpha) * z, innovation_scaled: false })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_roundtrip() {
        for j in 1..=12 {
            let c = CaseIndex::new(j).unwrap();
            assert_eq!(CaseIndex::from_parts(c.taper_regime(), c.dependence()).unwrap(), c);
            let r = RegimeSpec::defaults(j).unwrap();
            assert_eq!(r.case, c);
        }
        assert!(CaseIndex::new(0).is_err());
        assert!(CaseIndex::new(13).is_err());
    }

    #[test]
    fn inconsistent_regime_rejected() {
        let case = CaseIndex::new(1).unwrap();
        let srd = FilterSpec::srd(1.2).unwrap();
        assert!(RegimeSpec::new(case, srd, 0.5, 1.0, InnovationSpec::gaussian()).is_err());
        let lrd = FilterSpec::lrd(0.7).unwrap();
        assert!(RegimeSpec::new(case, lrd, 1.5, 1.0, InnovationSpec::gaussian()).is_err());
        assert!(RegimeSpec::new(case, lrd, 0.5, 1.0, InnovationSpec::gaussian()).is_ok());
    }

    #[test]
    fn stable_normalizer_shapes() {
        use crate::innovations::TailIndex;
        let a = TailIndex::new(1.5).unwrap();
        let r = RegimeSpec::defaults(4).unwrap().with_innovation(InnovationSpec::stable_pareto(a));
        let nz = normalizer(&r, 10_000, NormalizerMode::Exact).unwrap();
        let expect = 10_000f64.powf(1.0 / 1.5 + 0.3);
        assert!((nz.value / expect - 1.0).abs() < 1e-12);
    }
}
