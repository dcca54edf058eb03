//! Lyapunov fractions and the tapered/untapered coupling distance.

use rand::seq::index;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::profile::{coefficient_profile, CoefficientProfile};
use super::{normalizer, LimitFamily, NormalizerMode, RegimeSpec};
use crate::error::{domain, usage, Error, Result};
use crate::filters::Dependence;
use crate::innovations::{gaussian_abs_moment, moment_ratio, InnovationKind, TailIndex, TaperClass, TaperLevel};
use crate::rng::{open01, stream, SPARSE_STREAM_BASE};
use crate::special::KahanSum;

/// `L(2+δ, n, t) = Σ|d_{n,i,t}|^{2+δ} / (Σ d_{n,i,1}²)^{(2+δ)/2} · E|ε|^{2+δ}/(Eε²)^{(2+δ)/2}`.
pub fn lyapunov_fraction(regime: &RegimeSpec, n: u64, t: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return usage(format!("delta={delta} must lie in (0, 1]"));
    }
    if regime.filter.dependence() == Dependence::Nd {
        let beta = regime.beta();
        let cap = (3.0 - 2.0 * beta) / (beta - 1.0);
        if !(delta < cap) {
            return usage(format!("ND filter with beta={beta} needs delta < {cap}"));
        }
    }
    let p = 2.0 + delta;
    let law = regime.innovation.at(n)?;
    let moment = match law.kind {
        InnovationKind::GaussianUnit => gaussian_abs_moment(p),
        InnovationKind::TaperedPareto | InnovationKind::CenteredTaperedPareto if law.b.is_finite() => {
            moment_ratio(TailIndex::new(law.alpha)?, law.b, delta)?
        }
        _ => return usage(format!("{} innovations have no moment of order {p}", law.kind.name())),
    };
    let prof_t = coefficient_profile(regime, n, t)?;
    let var1 = if t == 1.0 {
        let (a, b) = prof_t.variance_split();
        a + b
    } else {
        let (a, b) = coefficient_profile(regime, n, 1.0)?.variance_split();
        a + b
    };
    let num = prof_t.values.iter().map(|d| d.abs().powf(p)).collect::<KahanSum>().value();
    Ok(num / var1.powf(p / 2.0) * moment)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingMethod {
    /// Draw every innovation pair.
    Dense,
    /// Draw only the positions where the Pareto variable exceeds `b_n`.
    #[default]
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingEstimate {
    /// Replica mean of `|V_n(t) − Z_n(t)|^r`.
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
}

struct CouplingSetup {
    alpha: f64,
    b: f64,
    mu_d: f64,
    a_n: f64,
}

/// `E(ζ − θ)` for `ζ` tapered at `b` and coupled to `θ`.
fn coupled_mean_gap(alpha: f64, b: f64) -> f64 {
    b.powf(-alpha) * (b + 1.0) - alpha * b.powf(1.0 - alpha) / (alpha - 1.0)
}

/// Monte Carlo estimate of `E|V_n(t) − Z_n(t)|^r`, where `V_n` is driven by
/// the tapered variables and `Z_n` by the Pareto variables they are built from.
pub fn coupling_distance(
    regime: &RegimeSpec,
    n: u64,
    t: f64,
    r: f64,
    replicas: usize,
    master_seed: u64,
    method: CouplingMethod,
) -> Result<CouplingEstimate> {
    let inn = regime.innovation;
    if !inn.kind.is_tapered() {
        return usage("coupling needs tapered Pareto innovations");
    }
    let alpha = inn.alpha.ok_or_else(|| Error::Usage("coupling needs alpha".into()))?.value();
    let zero = CouplingEstimate { mean: 0.0, stderr: 0.0, replicas };
    match inn.taper {
        Some(TaperLevel::Fixed(b)) if b.is_infinite() => return Ok(zero),
        Some(TaperLevel::Growing { .. }) if inn.taper_class() == Some(TaperClass::Soft) => {}
        _ => return usage("coupling is defined for soft tapering b_n = n^gamma, gamma > 1/alpha"),
    }
    if !(r > 0.0 && r < alpha) || (alpha > 1.0 && r < 1.0) {
        return usage(format!("r={r} must lie in (0, alpha) and be >= 1 when alpha > 1"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("t={t} must be non-negative"));
    }
    if t == 0.0 || (n as f64 * t) < 1.0 {
        return Ok(zero);
    }
    if regime.family()? != LimitFamily::Stable {
        return usage("coupling needs a stable regime");
    }
    let b = inn.taper.expect("checked").threshold(n);
    let mu_d = match inn.kind {
        InnovationKind::CenteredTaperedPareto if alpha > 1.0 => coupled_mean_gap(alpha, b),
        InnovationKind::CenteredTaperedPareto => return usage("centering needs alpha > 1"),
        _ => 0.0,
    };
    let setup = CouplingSetup { alpha, b, mu_d, a_n: normalizer(regime, n, NormalizerMode::Exact)?.value };
    let profile = coefficient_profile(regime, n, t)?;
    let shift = setup.mu_d * profile.sum();
    let values: Vec<f64> = match method {
        CouplingMethod::Dense => (0..replicas as u64)
            .into_par_iter()
            .map(|rep| dense_gap(&profile, &setup, master_seed, rep) - shift)
            .map(|d| (d / setup.a_n).abs().powf(r))
            .collect(),
        CouplingMethod::Sparse => {
            let hits = Binomial::new(profile.values.len() as u64, b.powf(-alpha))
                .map_err(|e| Error::Numerical(e.to_string()))?;
            (0..replicas as u64)
                .into_par_iter()
                .map(|rep| sparse_gap(&profile, &setup, &hits, master_seed, rep) - shift)
                .map(|d| (d / setup.a_n).abs().powf(r))
                .collect()
        }
    };
    let mean = values.iter().copied().collect::<KahanSum>().value() / replicas as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).collect::<KahanSum>().value() / (replicas as f64 - 1.0);
    Ok(CouplingEstimate { mean, stderr: (var / replicas as f64).sqrt(), replicas })
}

/// `Σ_i d_i (ζ_i − θ_i)` with every innovation pair drawn.
fn dense_gap(profile: &CoefficientProfile, s: &CouplingSetup, seed: u64, rep: u64) -> f64 {
    let mut rng = stream(seed, rep);
    let mut acc = KahanSum::new();
    for &d in &profile.values {
        let theta = open01(&mut rng).powf(-1.0 / s.alpha);
        let u2 = open01(&mut rng);
        if theta >= s.b {
            acc.add(d * (s.b - u2.ln() - theta));
        }
    }
    acc.value()
}

/// Same law as [`dense_gap`]: the exceedance count is binomial, its positions
/// uniform, and `θ | θ ≥ b` is `b·U^{−1/α}`.
fn sparse_gap(profile: &CoefficientProfile, s: &CouplingSetup, hits: &Binomial, seed: u64, rep: u64) -> f64 {
    let mut rng = stream(seed, SPARSE_STREAM_BASE + rep);
    let k = hits.sample(&mut rng) as usize;
    if k == 0 {
        return 0.0;
    }
    let mut pos: Vec<usize> = index::sample(&mut rng, profile.values.len(), k).into_vec();
    pos.sort_unstable();
    let mut acc = KahanSum::new();
    for i in pos {
        let theta = s.b * open01(&mut rng).powf(-1.0 / s.alpha);
        let excess = -open01(&mut rng).ln();
        acc.add(profile.values[i] * (s.b + excess - theta));
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterSpec;
    use crate::innovations::InnovationSpec;
    use crate::partial_sums::CaseIndex;

    #[test]
    fn iid_gaussian_lyapunov() {
        let r = RegimeSpec::new(CaseIndex::new(2).unwrap(), FilterSpec::iid(), 0.5, 1.0, InnovationSpec::gaussian())
            .unwrap();
        let n = 400;
        let l = lyapunov_fraction(&r, n, 1.0, 1.0).unwrap();
        let expect = gaussian_abs_moment(3.0) / (n as f64).sqrt();
        assert!((l / expect - 1.0).abs() < 1e-12, "{l} vs {expect}");
    }

    #[test]
    fn lyapunov_domain() {
        let r = RegimeSpec::defaults(2).unwrap();
        assert!(matches!(lyapunov_fraction(&r, 100, 1.0, 0.0), Err(Error::Usage(_))));
        assert!(matches!(lyapunov_fraction(&r, 100, 1.0, 1.5), Err(Error::Usage(_))));
        let nd = RegimeSpec::defaults(3).unwrap().with_beta(1.45).unwrap();
        // (3 − 2.9)/0.45 ≈ 0.22
        assert!(matches!(lyapunov_fraction(&nd, 100, 1.0, 0.5), Err(Error::Usage(_))));
    }

    fn soft(alpha: f64, gamma: f64) -> RegimeSpec {
        let a = TailIndex::new(alpha).unwrap();
        RegimeSpec::defaults(2)
            .unwrap()
            .with_innovation(InnovationSpec::centered_tapered(a, TaperLevel::growing(gamma).unwrap()))
    }

    #[test]
    fn coupling_trivial_cases() {
        let a = TailIndex::new(1.5).unwrap();
        let r = RegimeSpec::defaults(2)
            .unwrap()
            .with_innovation(InnovationSpec::centered_tapered(a, TaperLevel::Fixed(f64::INFINITY)));
        assert_eq!(coupling_distance(&r, 1000, 1.0, 1.0, 10, 1, CouplingMethod::Sparse).unwrap().mean, 0.0);
        let s = soft(1.5, 1.0);
        assert_eq!(coupling_distance(&s, 1000, 0.0, 1.0, 10, 1, CouplingMethod::Sparse).unwrap().mean, 0.0);
        let hard = soft(1.5, 0.4);
        assert!(matches!(coupling_distance(&hard, 1000, 1.0, 1.0, 10, 1, CouplingMethod::Dense), Err(Error::Usage(_))));
        let edge = soft(1.5, 2.0 / 3.0);
        assert!(matches!(coupling_distance(&edge, 1000, 1.0, 1.0, 10, 1, CouplingMethod::Dense), Err(Error::Usage(_))));
    }

    #[test]
    fn mean_gap_matches_quadrature() {
        // E(ζ − θ) = ∫_b^∞ [(b + 1) − x] α x^{−α−1} dx
        let (alpha, b) = (1.5, 7.0);
        let direct = crate::quadrature::integrate_power_tail(
            |x| (b + 1.0 - x) * alpha * x.powf(-alpha - 1.0),
            b,
            alpha,
            crate::quadrature::Tolerance::default(),
        )
        .unwrap()
        .value;
        assert!((coupled_mean_gap(alpha, b) - direct).abs() < 1e-10);
    }

    #[test]
    fn sparse_and_dense_agree() {
        let r = soft(1.5, 0.8);
        let n = 200;
        let reps = 40_000;
        let d = coupling_distance(&r, n, 1.0, 1.0, reps, 3, CouplingMethod::Dense).unwrap();
        let s = coupling_distance(&r, n, 1.0, 1.0, reps, 3, CouplingMethod::Sparse).unwrap();
        let se = (d.stderr.powi(2) + s.stderr.powi(2)).sqrt();
        assert!((d.mean - s.mean).abs() < 4.0 * se, "dense {} sparse {} se {se}", d.mean, s.mean);
    }
}
