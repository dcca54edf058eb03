//! Pareto and tapered Pareto innovations.
//!
//! A standard Pareto variable `θ` has `P(θ > x) = x^{-α}` on `[1, ∞)`. Its
//! tapered version at level `b` keeps `θ` below `b` and replaces the tail
//! by `b + R` with `R` standard exponential:
//!
//! ```text
//! density of ζ(α, b) = α x^{-α-1}        on [1, b)
//!                    = b^{-α} e^{-(x-b)} on [b, ∞)
//! ```
//!
//! Samplers take explicit uniforms so the raw and tapered variables can be
//! coupled on the same draws.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, usage, Error, Result};
use crate::quadrature::{gauss_kronrod, integrate_offset, integrate_piece, Estimate, Tolerance};
use crate::rng::open01;
use crate::special::gamma;

const MOMENT_TOL: Tolerance = Tolerance::new(1e-300, 1e-13);

/// Stable index `α ∈ (0, 2)`, `α ≠ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TailIndex(f64);

impl TailIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return domain(format!("tail index alpha={alpha} must lie in (0, 2)"));
        }
        if alpha == 1.0 {
            return Err(Error::Unsupported("alpha = 1 is excluded".into()));
        }
        Ok(Self(alpha))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `E θ = α/(α−1)`, finite for `α > 1` only.
    pub fn pareto_mean(self) -> Option<f64> {
        (self.0 > 1.0).then(|| self.0 / (self.0 - 1.0))
    }
}

/// Level at which a Pareto tail is tapered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaperLevel {
    /// Constant threshold `b ≥ 1`; `f64::INFINITY` means no taper at all.
    Fixed(f64),
    /// `b(n) = n^γ`.
    Growing { gamma: f64 },
}

impl TaperLevel {
    pub fn fixed(b: f64) -> Result<Self> {
        if !(b >= 1.0) {
            return domain(format!("taper threshold b={b} must be >= 1"));
        }
        Ok(Self::Fixed(b))
    }

    pub fn growing(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return domain(format!("taper exponent gamma={gamma} must be positive"));
        }
        Ok(Self::Growing { gamma })
    }

    pub fn threshold(&self, n: u64) -> f64 {
        match *self {
            Self::Fixed(b) => b,
            Self::Growing { gamma } => (n.max(1) as f64).powf(gamma),
        }
    }
}

/// Inverse-CDF Pareto draw `u^{-1/α}` for any `α > 0`.
///
/// [`sample_pareto`] is the validated entry point; this one also accepts
/// `α ≥ 1` values that have no limit law attached.
pub fn pareto_from_uniform(alpha: f64, u: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return domain(format!("alpha={alpha} must be positive"));
    }
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("uniform variate {u} outside (0, 1)"));
    }
    Ok(u.powf(-1.0 / alpha))
}

pub fn sample_pareto(alpha: TailIndex, u: f64) -> Result<f64> {
    pareto_from_uniform(alpha.value(), u)
}

/// Tapered draw from two uniforms; `b = ∞` reproduces [`pareto_from_uniform`].
pub fn tapered_from_uniforms(alpha: f64, b: f64, u1: f64, u2: f64) -> Result<f64> {
    if !(b >= 1.0) {
        return domain(format!("taper threshold b={b} must be >= 1"));
    }
    if !(u2 > 0.0 && u2 < 1.0) {
        return domain(format!("uniform variate {u2} outside (0, 1)"));
    }
    let theta = pareto_from_uniform(alpha, u1)?;
    Ok(if theta < b { theta } else { b - u2.ln() })
}

pub fn sample_tapered_pareto(alpha: TailIndex, b: f64, u1: f64, u2: f64) -> Result<f64> {
    tapered_from_uniforms(alpha.value(), b, u1, u2)
}

/// `E ζ(α, b)^p`.
///
/// The body `∫_1^b α x^{p-α-1} dx` is elementary; the exponential part
/// `b^{-α} E(b+R)^p` goes through quadrature.
pub fn tapered_moment(alpha: TailIndex, b: f64, p: f64) -> Result<f64> {
    let a = alpha.value();
    if !(p > 0.0) {
        return domain(format!("moment order p={p} must be positive"));
    }
    if !(b >= 1.0) {
        return domain(format!("taper threshold b={b} must be >= 1"));
    }
    if b.is_infinite() {
        if p < a {
            return Ok(a / (a - p));
        }
        return domain(format!("untapered Pareto moment of order {p} >= alpha={a} is infinite"));
    }
    let body = if (p - a).abs() < 1e-12 { a * b.ln() } else { a * (b.powf(p - a) - 1.0) / (p - a) };
    // b^{-α}(b+r)^p = b^{p-α}(1+r/b)^p
    let shape = gauss_kronrod(|r| (1.0 + r / b).powf(p) * (-r).exp(), 0.0, 80.0 + 4.0 * p, MOMENT_TOL)?;
    Ok(body + b.powf(p - a) * shape.value)
}

/// `∫ |x − μ|^p` against the tapered density.
fn centered_abs_moment_raw(a: f64, b: f64, mu: f64, p: f64) -> Result<f64> {
    let dens = |x: f64| a * x.powf(-a - 1.0);
    let mut total = Estimate::ZERO;
    // Pareto body on [1, b), kink at μ when μ < b.
    let lo_end = mu.min(b);
    total = total
        + integrate_piece(
            |base, off| {
                let x = base + off;
                let dist = if base == mu { -off } else { mu - x };
                dens(x) * dist.abs().powf(p)
            },
            1.0,
            lo_end,
            None,
            if mu <= b { Some(p) } else { None },
            MOMENT_TOL,
        )?;
    if mu < b {
        let mid = (2.0 * mu).min(b);
        total = total + integrate_piece(|_, off| dens(mu + off) * off.powf(p), mu, mid, Some(p), None, MOMENT_TOL)?;
        if mid < b {
            // log scale for the long power-law stretch
            total = total
                + gauss_kronrod(
                    |y| {
                        let x = y.exp();
                        dens(x) * (x - mu).powf(p) * x
                    },
                    mid.ln(),
                    b.ln(),
                    MOMENT_TOL,
                )?;
        }
    }
    // Exponential part, kink at r = μ − b when μ > b.
    let w = b.powf(-a);
    let mut expo = Estimate::ZERO;
    let span = 80.0 + 4.0 * p + mu;
    if mu > b {
        let kink = mu - b;
        expo = expo + integrate_offset(|d| d.powf(p) * (-(kink - d)).exp(), kink, p, MOMENT_TOL)?;
        expo = expo + integrate_offset(|d| d.powf(p) * (-(kink + d)).exp(), span, p, MOMENT_TOL)?;
    } else {
        let gap = b - mu;
        expo = expo + gauss_kronrod(|r| (gap + r).powf(p) * (-r).exp(), 0.0, span, MOMENT_TOL)?;
    }
    Ok(total.value + w * expo.value)
}

/// `E|ζ − Eζ|^p`.
pub fn tapered_centered_abs_moment(alpha: TailIndex, b: f64, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return domain(format!("moment order p={p} must be positive"));
    }
    if !(b >= 1.0 && b.is_finite()) {
        return domain(format!("finite taper threshold required, got b={b}"));
    }
    let mu = tapered_moment(alpha, b, 1.0)?;
    centered_abs_moment_raw(alpha.value(), b, mu, p)
}

/// `Var ζ(α, b)`.
pub fn tapered_variance(alpha: TailIndex, b: f64) -> Result<f64> {
    let m1 = tapered_moment(alpha, b, 1.0)?;
    let m2 = tapered_moment(alpha, b, 2.0)?;
    Ok(m2 - m1 * m1)
}

/// `E|ξ|^{2+δ} / (E ξ²)^{(2+δ)/2}` for the centered tapered variable `ξ`.
pub fn moment_ratio(alpha: TailIndex, b: f64, delta: f64) -> Result<f64> {
    let p = 2.0 + delta;
    let num = tapered_centered_abs_moment(alpha, b, p)?;
    let var = tapered_variance(alpha, b)?;
    Ok(num / var.powf(p / 2.0))
}

/// One rung of [`moment_ratio_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRatioPoint {
    pub n: u64,
    pub ratio: f64,
    /// Growth shape `n^{γαδ/2}` the ratio is bounded by up to a constant.
    pub bound: f64,
}

/// Moment ratio along an n-ladder with `b_n = n^γ`, next to its growth bound.
pub fn moment_ratio_bound_check(
    alpha: TailIndex,
    gamma: f64,
    delta: f64,
    n_ladder: &[u64],
) -> Result<Vec<MomentRatioPoint>> {
    if !(gamma > 0.0) {
        return domain(format!("gamma={gamma} must be positive"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta={delta} must lie in (0, 1]"));
    }
    n_ladder
        .iter()
        .map(|&n| {
            if n < 2 {
                return domain("n must be at least 2");
            }
            let b = (n as f64).powf(gamma);
            Ok(MomentRatioPoint {
                n,
                ratio: moment_ratio(alpha, b, delta)?,
                bound: (n as f64).powf(gamma * alpha.value() * delta / 2.0),
            })
        })
        .collect()
}

/// Regime of `b_n = n^γ` relative to the tail: `n·P(θ > b_n) → ∞, 0` or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaperClass {
    Hard,
    Soft,
    Intermediate,
}

pub fn classify_innovation_taper(alpha: TailIndex, gamma: f64) -> Result<TaperClass> {
    if !(gamma > 0.0) {
        return domain(format!("gamma={gamma} must be positive"));
    }
    let edge = 1.0 / alpha.value();
    Ok(if (gamma - edge).abs() <= 1e-12 * edge {
        TaperClass::Intermediate
    } else if gamma < edge {
        TaperClass::Hard
    } else {
        TaperClass::Soft
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnovationKind {
    GaussianUnit,
    Pareto,
    TaperedPareto,
    CenteredPareto,
    CenteredTaperedPareto,
}

impl InnovationKind {
    pub fn is_tapered(self) -> bool {
        matches!(self, Self::TaperedPareto | Self::CenteredTaperedPareto)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::GaussianUnit => "gaussian",
            Self::Pareto => "pareto",
            Self::TaperedPareto => "tapered-pareto",
            Self::CenteredPareto => "centered-pareto",
            Self::CenteredTaperedPareto => "centered-tapered-pareto",
        }
    }
}

/// Innovation family, possibly with an n-dependent taper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationSpec {
    pub kind: InnovationKind,
    pub alpha: Option<TailIndex>,
    pub taper: Option<TaperLevel>,
}

impl InnovationSpec {
    pub fn gaussian() -> Self {
        Self { kind: InnovationKind::GaussianUnit, alpha: None, taper: None }
    }

    pub fn pareto(alpha: TailIndex) -> Self {
        Self { kind: InnovationKind::Pareto, alpha: Some(alpha), taper: None }
    }

    pub fn centered_pareto(alpha: TailIndex) -> Result<Self> {
        if alpha.value() < 1.0 {
            return usage(format!("centered Pareto needs alpha > 1, got {}", alpha.value()));
        }
        Ok(Self { kind: InnovationKind::CenteredPareto, alpha: Some(alpha), taper: None })
    }

    /// Raw Pareto for `α < 1`, centered for `α > 1`.
    pub fn stable_pareto(alpha: TailIndex) -> Self {
        if alpha.value() > 1.0 {
            Self { kind: InnovationKind::CenteredPareto, alpha: Some(alpha), taper: None }
        } else {
            Self::pareto(alpha)
        }
    }

    pub fn tapered(alpha: TailIndex, taper: TaperLevel) -> Self {
        Self { kind: InnovationKind::TaperedPareto, alpha: Some(alpha), taper: Some(taper) }
    }

    pub fn centered_tapered(alpha: TailIndex, taper: TaperLevel) -> Self {
        Self { kind: InnovationKind::CenteredTaperedPareto, alpha: Some(alpha), taper: Some(taper) }
    }

    /// Taper class when the threshold grows like `n^γ`.
    pub fn taper_class(&self) -> Option<TaperClass> {
        match (self.alpha, self.taper) {
            (Some(a), Some(TaperLevel::Growing { gamma })) => classify_innovation_taper(a, gamma).ok(),
            _ => None,
        }
    }

    /// Resolve the taper threshold at sample size `n`.
    pub fn at(&self, n: u64) -> Result<InnovationLaw> {
        let alpha = self.alpha.map(TailIndex::value).unwrap_or(2.0);
        let b = self.taper.map(|t| t.threshold(n)).unwrap_or(f64::INFINITY);
        let shift = match self.kind {
            InnovationKind::GaussianUnit | InnovationKind::Pareto | InnovationKind::TaperedPareto => 0.0,
            InnovationKind::CenteredPareto => self
                .alpha
                .and_then(TailIndex::pareto_mean)
                .ok_or_else(|| Error::Usage("centered Pareto needs alpha > 1".into()))?,
            InnovationKind::CenteredTaperedPareto => {
                let a = self.alpha.ok_or_else(|| Error::Usage("tapered kind needs alpha".into()))?;
                if b.is_infinite() {
                    a.pareto_mean().ok_or_else(|| Error::Usage("centering an untapered alpha<1 Pareto".into()))?
                } else {
                    tapered_moment(a, b, 1.0)?
                }
            }
        };
        if self.kind != InnovationKind::GaussianUnit && self.alpha.is_none() {
            return usage(format!("{} innovations need alpha", self.kind.name()));
        }
        if self.kind.is_tapered() && self.taper.is_none() {
            return usage(format!("{} innovations need a taper level", self.kind.name()));
        }
        Ok(InnovationLaw { kind: self.kind, alpha, b, shift })
    }
}

/// Innovation law at a fixed sample size: threshold and centering resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationLaw {
    pub kind: InnovationKind,
    pub alpha: f64,
    pub b: f64,
    /// Mean subtracted from every draw.
    pub shift: f64,
}

impl InnovationLaw {
    pub fn gaussian() -> Self {
        Self { kind: InnovationKind::GaussianUnit, alpha: 2.0, b: f64::INFINITY, shift: 0.0 }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            InnovationKind::GaussianUnit => rng.sample(StandardNormal),
            InnovationKind::Pareto | InnovationKind::CenteredPareto => open01(rng).powf(-1.0 / self.alpha) - self.shift,
            InnovationKind::TaperedPareto | InnovationKind::CenteredTaperedPareto => {
                let theta = open01(rng).powf(-1.0 / self.alpha);
                let u2 = open01(rng);
                (if theta < self.b { theta } else { self.b - u2.ln() }) - self.shift
            }
        }
    }

    /// Innovation variance, if finite.
    pub fn variance(&self) -> Result<Option<f64>> {
        match self.kind {
            InnovationKind::GaussianUnit => Ok(Some(1.0)),
            InnovationKind::Pareto | InnovationKind::CenteredPareto => Ok(None),
            _ if self.b.is_infinite() => Ok(None),
            _ => Ok(Some(tapered_variance(TailIndex(self.alpha), self.b)?)),
        }
    }

    /// `E|ε|^p` of the (centered) innovation.
    pub fn centered_abs_moment(&self, p: f64) -> Result<f64> {
        match self.kind {
            InnovationKind::GaussianUnit => Ok(gaussian_abs_moment(p)),
            InnovationKind::TaperedPareto | InnovationKind::CenteredTaperedPareto if self.b.is_finite() => {
                tapered_centered_abs_moment(TailIndex(self.alpha), self.b, p)
            }
            _ => domain(format!("{} innovations have no finite moment of order {p}", self.kind.name())),
        }
    }
}

/// `E|N(0,1)|^p = 2^{p/2} Γ((p+1)/2) / √π`.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
}
