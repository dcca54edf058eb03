//! Monte Carlo comparisons of simulated normalized sums against their limits.
//!
//! Every `run_*` function returns a [`ComparisonReport`]: a flat list of
//! rows, each holding an estimate, its standard error, the theoretical value,
//! a z-score and a pass flag. Formatting is left to callers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::limit_laws::GaussianLimit;
use crate::partial_sums::{
    coefficient_profile, coupling_distance, exact_variance, lyapunov_fraction, normalizer,
    simulate_normalized_replicas, CouplingMethod, LimitFamily, NormalizerMode, RegimeSpec,
};
use crate::stats::{ks_normal, ls_slope, mean, variance, Bootstrap, DEFAULT_RESAMPLES};

/// Per-cell z threshold.
pub const DEFAULT_THRESHOLD: f64 = 3.0;
/// Fraction of passing cells needed for a family-wise pass.
pub const FAMILY_PASS_FRACTION: f64 = 0.95;
/// KS p-values above this pass.
pub const KS_LEVEL: f64 = 0.01;
/// Allowed distance between a fitted log-slope and its predicted value.
pub const SLOPE_TOLERANCE: f64 = 0.15;
/// Cap on innovation draws per stable check and sample size.
pub const MAX_STABLE_DRAWS: f64 = 1e9;
/// Smallest replica count for checks that report confidence intervals.
pub const MIN_REPLICAS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    Variance,
    Covariance,
    GaussianKs,
    StableCf,
    Lyapunov,
    Coupling,
}

/// Kind of a report row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    Mean,
    Variance,
    /// Replica variance against the exact finite-n variance.
    VarianceExact,
    Covariance,
    Ks,
    Cf,
    /// CF of `Σ_l Z_n(t_l)` against the combined kernel.
    CfJoint,
    Lyapunov,
    Coupling,
    Slope,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::Variance => "variance",
            Self::VarianceExact => "variance_exact",
            Self::Covariance => "covariance",
            Self::Ks => "ks",
            Self::Cf => "cf",
            Self::CfJoint => "cf_joint",
            Self::Lyapunov => "lyapunov",
            Self::Coupling => "coupling",
            Self::Slope => "slope",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub regime: RegimeSpec,
    pub n_ladder: Vec<u64>,
    pub t_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    pub replicas: usize,
    pub master_seed: u64,
    pub checks: Vec<Check>,
    pub threshold: f64,
    pub normalizer: NormalizerMode,
    pub resamples: usize,
    /// Lyapunov exponent increment `δ`.
    pub delta: f64,
    /// Coupling moment order `r`.
    pub r: f64,
    pub coupling_method: CouplingMethod,
}

impl ExperimentPlan {
    pub fn new(regime: RegimeSpec) -> Self {
        Self {
            regime,
            n_ladder: vec![1 << 10, 1 << 12, 1 << 14],
            t_grid: vec![0.5, 1.0, 2.0],
            theta_grid: vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
            replicas: 1000,
            master_seed: 0,
            checks: vec![Check::Variance, Check::Covariance, Check::GaussianKs, Check::StableCf],
            threshold: DEFAULT_THRESHOLD,
            normalizer: NormalizerMode::Exact,
            resamples: DEFAULT_RESAMPLES,
            delta: 1.0,
            r: 1.0,
            coupling_method: CouplingMethod::Sparse,
        }
    }

    fn has(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }

    fn validate(&self, needs_ci: bool) -> Result<()> {
        if self.n_ladder.is_empty() || self.n_ladder.windows(2).any(|w| w[0] >= w[1]) || self.n_ladder[0] == 0 {
            return Err(Error::Usage("n ladder must be non-empty, positive and strictly ascending".into()));
        }
        if self.t_grid.is_empty() || self.t_grid.windows(2).any(|w| !(w[0] < w[1])) || !(self.t_grid[0] > 0.0) {
            return Err(Error::Usage("t grid must be non-empty, positive and strictly ascending".into()));
        }
        if needs_ci && self.replicas < MIN_REPLICAS {
            return Err(Error::Usage(format!("at least {MIN_REPLICAS} replicas needed, got {}", self.replicas)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub kind: RowKind,
    pub case_j: u8,
    pub n: u64,
    pub t: f64,
    pub s: Option<f64>,
    pub theta: Option<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub theory: f64,
    pub z: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
}

impl ReportRow {
    #[allow(clippy::too_many_arguments)]
    fn scored(kind: RowKind, j: u8, n: u64, t: f64, estimate: f64, stderr: f64, theory: f64, threshold: f64) -> Self {
        let diff = estimate - theory;
        let z = if diff == 0.0 { 0.0 } else { diff / stderr };
        Self {
            kind,
            case_j: j,
            n,
            t,
            s: None,
            theta: None,
            estimate,
            stderr,
            theory,
            z,
            p_value: None,
            pass: z.abs() <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
}

impl ComparisonReport {
    pub fn pass_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        self.rows.iter().filter(|r| r.pass).count() as f64 / self.rows.len() as f64
    }

    pub fn family_pass(&self) -> bool {
        self.pass_fraction() >= FAMILY_PASS_FRACTION
    }

    pub fn rows_of(&self, kind: RowKind) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }
}

fn column(paths: &[Vec<f64>], k: usize) -> Vec<f64> {
    paths.iter().map(|p| p[k]).collect()
}

/// Variance, covariance and normality of `Z_n(t)` against the Gaussian limit.
pub fn run_gaussian_check(plan: &ExperimentPlan) -> Result<ComparisonReport> {
    plan.validate(true)?;
    let regime = &plan.regime;
    if regime.family()? != LimitFamily::Gaussian {
        return Err(Error::Usage(format!(
            "{} innovations fall outside the Gaussian limit theory",
            regime.innovation.kind.name()
        )));
    }
    let j = regime.case.value();
    let limit = GaussianLimit::new(j, regime.beta(), regime.c)?;
    let th = plan.threshold;
    let boot = Bootstrap::new(plan.master_seed, plan.replicas, plan.resamples);
    let mut rows = Vec::new();
    for &n in &plan.n_ladder {
        let paths =
            simulate_normalized_replicas(regime, n, &plan.t_grid, plan.replicas, plan.master_seed, plan.normalizer)?;
        let a = normalizer(regime, n, plan.normalizer)?.value;
        let inn_var = regime.innovation.at(n)?.variance()?.expect("Gaussian family has a variance");
        let cols: Vec<Vec<f64>> = (0..plan.t_grid.len()).map(|k| column(&paths, k)).collect();
        for (k, &t) in plan.t_grid.iter().enumerate() {
            let x = &cols[k];
            if plan.has(Check::Variance) {
                let sd = variance(x).sqrt();
                rows.push(ReportRow::scored(RowKind::Mean, j, n, t, mean(x), sd / (x.len() as f64).sqrt(), 0.0, th));
                let v = variance(x);
                let se = boot.std_error(x, variance);
                rows.push(ReportRow::scored(RowKind::Variance, j, n, t, v, se, limit.variance(t)?, th));
                let exact = exact_variance(&coefficient_profile(regime, n, t)?, inn_var) / (a * a);
                rows.push(ReportRow::scored(RowKind::VarianceExact, j, n, t, v, se, exact, th));
            }
            if plan.has(Check::GaussianKs) {
                let (d, p) = ks_normal(x)?;
                rows.push(ReportRow {
                    kind: RowKind::Ks,
                    case_j: j,
                    n,
                    t,
                    s: None,
                    theta: None,
                    estimate: d,
                    stderr: f64::NAN,
                    theory: 0.0,
                    z: f64::NAN,
                    p_value: Some(p),
                    pass: p > KS_LEVEL,
                });
            }
        }
        if plan.has(Check::Covariance) {
            for a_idx in 0..plan.t_grid.len() {
                for b_idx in a_idx + 1..plan.t_grid.len() {
                    let (t, s) = (plan.t_grid[a_idx], plan.t_grid[b_idx]);
                    let (x, y) = (&cols[a_idx], &cols[b_idx]);
                    let est = sample_cov(x, y);
                    let se = boot.std_error_by(|idx| {
                        let xs: Vec<f64> = idx.iter().map(|&i| x[i as usize]).collect();
                        let ys: Vec<f64> = idx.iter().map(|&i| y[i as usize]).collect();
                        sample_cov(&xs, &ys)
                    });
                    let mut row = ReportRow::scored(RowKind::Covariance, j, n, t, est, se, limit.covariance(t, s)?, th);
                    row.s = Some(s);
                    rows.push(row);
                }
            }
        }
    }
    Ok(ComparisonReport { rows })
}

fn sample_cov(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn empirical_cf(x: &[f64], theta: f64) -> Complex64 {
    let (c, s) = x.iter().fold((0.0, 0.0), |(c, s), &v| (c + (theta * v).cos(), s + (theta * v).sin()));
    Complex64::new(c, s) / x.len() as f64
}

#[allow(clippy::too_many_arguments)]
fn cf_row(
    kind: RowKind,
    j: u8,
    n: u64,
    t: f64,
    theta: f64,
    x: &[f64],
    log_cf: Complex64,
    boot: &Bootstrap,
    th: f64,
) -> ReportRow {
    let emp = empirical_cf(x, theta);
    let est = (emp - log_cf.exp()).norm();
    let (se_re, se_im) = boot.cf_std_error(x, theta);
    let se = se_re.hypot(se_im);
    let z = if est == 0.0 { 0.0 } else { est / se };
    ReportRow {
        kind,
        case_j: j,
        n,
        t,
        s: None,
        theta: Some(theta),
        estimate: est,
        stderr: se,
        theory: 0.0,
        z,
        p_value: None,
        pass: z <= th,
    }
}

/// Empirical CF of `Z_n(t)` against the stable limit, plus the joint CF of
/// `Σ_l Z_n(t_l)` when the grid has several points.
pub fn run_stable_check(plan: &ExperimentPlan) -> Result<ComparisonReport> {
    plan.validate(true)?;
    let regime = &plan.regime;
    if regime.family()? != LimitFamily::Stable {
        return Err(Error::Usage(format!(
            "{} innovations fall outside the stable limit theory",
            regime.innovation.kind.name()
        )));
    }
    let limit = regime.stable_limit()?;
    let j = regime.case.value();
    let th = plan.threshold;
    let t_max = *plan.t_grid.last().expect("validated");
    for &n in &plan.n_ladder {
        let lam = regime.tapered(n)?.lambda() as f64;
        let draws = plan.replicas as f64 * (n as f64 * t_max + lam + 1.0);
        if draws > MAX_STABLE_DRAWS {
            let fit = (MAX_STABLE_DRAWS / (n as f64 * t_max + lam + 1.0)).floor();
            return Err(Error::Size(format!(
                "{draws:.3e} innovation draws at n={n} exceed {MAX_STABLE_DRAWS:e}; use at most {fit} replicas"
            )));
        }
    }
    let boot = Bootstrap::new(plan.master_seed, plan.replicas, plan.resamples);
    let mut rows = Vec::new();
    for &n in &plan.n_ladder {
        let paths =
            simulate_normalized_replicas(regime, n, &plan.t_grid, plan.replicas, plan.master_seed, plan.normalizer)?;
        for (k, &t) in plan.t_grid.iter().enumerate() {
            let x = column(&paths, k);
            for &theta in &plan.theta_grid {
                rows.push(cf_row(RowKind::Cf, j, n, t, theta, &x, limit.log_cf(theta, t)?, &boot, th));
            }
        }
        if plan.t_grid.len() > 1 {
            let x: Vec<f64> = paths.iter().map(|p| p.iter().sum()).collect();
            let terms: Vec<(f64, f64)> = plan.t_grid.iter().map(|&t| (1.0, t)).collect();
            for &theta in &plan.theta_grid {
                let lc = limit.joint_log_cf(theta, &terms)?;
                rows.push(cf_row(RowKind::CfJoint, j, n, t_max, theta, &x, lc, &boot, th));
            }
        }
    }
    Ok(ComparisonReport { rows })
}

/// `L(2+δ, n, t)` along the ladder and the log–log slope per `t`, which must
/// be negative.
pub fn run_lyapunov_sweep(plan: &ExperimentPlan) -> Result<ComparisonReport> {
    plan.validate(false)?;
    if plan.n_ladder.len() < 2 {
        return Err(Error::InsufficientData("a slope needs at least two sample sizes".into()));
    }
    let j = plan.regime.case.value();
    let mut rows = Vec::new();
    for &t in &plan.t_grid {
        let mut logs = Vec::new();
        for &n in &plan.n_ladder {
            let l = lyapunov_fraction(&plan.regime, n, t, plan.delta)?;
            logs.push(((n as f64).ln(), l.ln()));
            rows.push(ReportRow {
                kind: RowKind::Lyapunov,
                case_j: j,
                n,
                t,
                s: None,
                theta: None,
                estimate: l,
                stderr: 0.0,
                theory: 0.0,
                z: f64::NAN,
                p_value: None,
                pass: l.is_finite(),
            });
        }
        let (x, y): (Vec<f64>, Vec<f64>) = logs.into_iter().unzip();
        let (slope, _, _) = ls_slope(&x, &y)?;
        rows.push(ReportRow {
            kind: RowKind::Slope,
            case_j: j,
            n: *plan.n_ladder.last().expect("validated"),
            t,
            s: None,
            theta: None,
            estimate: slope,
            stderr: 0.0,
            theory: f64::NAN,
            z: f64::NAN,
            p_value: None,
            pass: slope < 0.0,
        });
    }
    Ok(ComparisonReport { rows })
}

/// Predicted log-slope `(α − r)(1/α − γ)` of the coupling distance.
pub fn coupling_rate(alpha: f64, r: f64, gamma: f64) -> f64 {
    (alpha - r) * (1.0 / alpha - gamma)
}

/// `E|V_n(t) − Z_n(t)|^r` along the ladder and its log-slope against
/// [`coupling_rate`].
pub fn run_coupling_check(plan: &ExperimentPlan) -> Result<ComparisonReport> {
    plan.validate(true)?;
    if plan.n_ladder.len() < 2 {
        return Err(Error::InsufficientData("a slope needs at least two sample sizes".into()));
    }
    let regime = &plan.regime;
    let j = regime.case.value();
    let gamma = match regime.innovation.taper {
        Some(crate::innovations::TaperLevel::Growing { gamma }) => gamma,
        _ => return Err(Error::Usage("coupling check needs a growing taper b_n = n^gamma".into())),
    };
    let alpha = regime.innovation.alpha.ok_or_else(|| Error::Usage("coupling needs alpha".into()))?.value();
    let rate = coupling_rate(alpha, plan.r, gamma);
    let mut rows = Vec::new();
    for &t in &plan.t_grid {
        let mut pts = Vec::new();
        for &n in &plan.n_ladder {
            let est = coupling_distance(regime, n, t, plan.r, plan.replicas, plan.master_seed, plan.coupling_method)?;
            pts.push(((n as f64).ln(), est.mean, est.stderr));
            rows.push(ReportRow {
                kind: RowKind::Coupling,
                case_j: j,
                n,
                t,
                s: None,
                theta: None,
                estimate: est.mean,
                stderr: est.stderr,
                theory: f64::NAN,
                z: f64::NAN,
                p_value: None,
                pass: est.mean.is_finite(),
            });
        }
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        let (slope, _, _) = ls_slope(&x, &y)?;
        // Monte Carlo error of the slope from the per-point relative errors
        let mx = mean(&x);
        let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
        let se = pts.iter().map(|&(lx, m, s)| ((lx - mx) / sxx * s / m).powi(2)).sum::<f64>().sqrt();
        let diff = slope - rate;
        rows.push(ReportRow {
            kind: RowKind::Slope,
            case_j: j,
            n: *plan.n_ladder.last().expect("validated"),
            t,
            s: None,
            theta: None,
            estimate: slope,
            stderr: se,
            theory: rate,
            z: if diff == 0.0 { 0.0 } else { diff / se },
            p_value: None,
            pass: diff.abs() <= SLOPE_TOLERANCE,
        });
    }
    Ok(ComparisonReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterSpec;
    use crate::innovations::{InnovationSpec, TailIndex, TaperLevel};
    use crate::partial_sums::CaseIndex;

    fn iid() -> RegimeSpec {
        RegimeSpec::new(CaseIndex::new(2).unwrap(), FilterSpec::iid(), 0.5, 1.0, InnovationSpec::gaussian()).unwrap()
    }

    #[test]
    fn gaussian_check_on_iid_passes() {
        let mut plan = ExperimentPlan::new(iid());
        plan.n_ladder = vec![256];
        plan.replicas = 2000;
        plan.master_seed = 5;
        let rep = run_gaussian_check(&plan).unwrap();
        assert!(rep.family_pass(), "{:?}", rep.rows);
        // exact variance of the iid sum is ⌊nt⌋/n
        for r in rep.rows_of(RowKind::VarianceExact) {
            assert!((r.theory - (256.0 * r.t).floor() / 256.0).abs() < 1e-12);
        }
    }

    #[test]
    fn soft_taper_rejected_by_gaussian_check() {
        let a = TailIndex::new(1.5).unwrap();
        let r = iid().with_innovation(InnovationSpec::centered_tapered(a, TaperLevel::growing(1.0).unwrap()));
        let mut plan = ExperimentPlan::new(r);
        plan.n_ladder = vec![64];
        plan.replicas = 100;
        assert!(matches!(run_gaussian_check(&plan), Err(Error::Usage(_))));
    }

    #[test]
    fn theta_zero_cf_is_exact() {
        let a = TailIndex::new(1.5).unwrap();
        let r = iid().with_innovation(InnovationSpec::stable_pareto(a));
        let mut plan = ExperimentPlan::new(r);
        plan.n_ladder = vec![64];
        plan.t_grid = vec![1.0];
        plan.theta_grid = vec![0.0];
        plan.replicas = 100;
        let rep = run_stable_check(&plan).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].estimate, 0.0);
        assert_eq!(rep.rows[0].z, 0.0);
        assert!(rep.rows[0].pass);
    }

    #[test]
    fn single_n_lyapunov_is_insufficient() {
        let mut plan = ExperimentPlan::new(iid());
        plan.n_ladder = vec![64];
        assert!(matches!(run_lyapunov_sweep(&plan), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn iid_lyapunov_slope() {
        let mut plan = ExperimentPlan::new(iid());
        plan.t_grid = vec![1.0];
        let rep = run_lyapunov_sweep(&plan).unwrap();
        let s = rep.rows_of(RowKind::Slope).next().unwrap();
        assert!((s.estimate + 0.5).abs() < 1e-9, "{}", s.estimate);
    }

    #[test]
    fn stable_draw_cap() {
        let a = TailIndex::new(1.5).unwrap();
        let r = iid().with_innovation(InnovationSpec::stable_pareto(a));
        let mut plan = ExperimentPlan::new(r);
        plan.n_ladder = vec![1_000_000];
        plan.replicas = 10_000;
        assert!(matches!(run_stable_check(&plan), Err(Error::Size(_))));
    }

    #[test]
    fn report_is_reproducible() {
        let mut plan = ExperimentPlan::new(RegimeSpec::defaults(8).unwrap());
        plan.n_ladder = vec![128];
        plan.replicas = 200;
        plan.master_seed = 77;
        // rows carry NaN fields, so compare renderings
        let a = format!("{:?}", run_gaussian_check(&plan).unwrap());
        assert_eq!(a, format!("{:?}", run_gaussian_check(&plan).unwrap()));
    }
}
