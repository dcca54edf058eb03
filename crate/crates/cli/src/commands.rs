//! Subcommand implementations. Each takes fully merged [`Settings`], fills in
//! the defaults it relies on (so the header is complete) and returns a table.

use tapered_lp::innovations::TaperLevel;
use tapered_lp::limit_laws::{constant, hurst, normalizer_exponent, simulate_gaussian_limit, simulate_tfsm3, tf3};
use tapered_lp::mc_harness::{
    run_coupling_check, run_gaussian_check, run_lyapunov_sweep, run_stable_check, Check, DEFAULT_THRESHOLD,
};
use tapered_lp::partial_sums::{simulate_normalized_replicas, CouplingMethod};
use tapered_lp::{
    CaseIndex, ComparisonReport, Error, ExperimentPlan, GaussianLimit, InnovationSpec, NormalizerMode, RegimeSpec,
    Result, TailIndex, TfKernel,
};

use crate::output::{Cell, Table};
use crate::settings::{parse_grid, Settings};

/// What a command produced: the table and whether its checks passed.
pub struct Outcome {
    pub table: Table,
    pub pass: bool,
}

impl Outcome {
    fn plain(table: Table) -> Self {
        Self { table, pass: true }
    }
}

pub const COMMANDS: &[&str] = &[
    "constants",
    "verify-gaussian",
    "verify-stable",
    "verify-lyapunov",
    "verify-coupling",
    "simulate-zn",
    "simulate-limit",
    "simulate-tfbm3",
    "simulate-tfsm3",
];

pub fn run(command: &str, s: &mut Settings) -> Result<Outcome> {
    match command {
        "constants" => constants(s).map(Outcome::plain),
        "verify-gaussian" => verify(s, Kind::Gaussian),
        "verify-stable" => verify(s, Kind::Stable),
        "verify-lyapunov" => verify(s, Kind::Lyapunov),
        "verify-coupling" => verify(s, Kind::Coupling),
        "simulate-zn" => simulate_zn(s).map(Outcome::plain),
        "simulate-limit" => simulate_limit(s).map(Outcome::plain),
        "simulate-tfbm3" => simulate_tf3(s, true).map(Outcome::plain),
        "simulate-tfsm3" => simulate_tf3(s, false).map(Outcome::plain),
        _ => Err(Error::Usage(format!("unknown command {command}"))),
    }
}

fn fmt_list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Time points from `--grid a:step:b` or `--t list`, defaulting to `default`.
fn times(s: &mut Settings, default: &[f64]) -> Result<Vec<f64>> {
    if let Some(g) = s.get("grid") {
        if s.has("t") {
            return Err(Error::Usage("give either --t or --grid, not both".into()));
        }
        return parse_grid(g);
    }
    match s.f64_list("t")? {
        Some(t) => Ok(t),
        None => {
            s.set("t", fmt_list(default));
            Ok(default.to_vec())
        }
    }
}

fn case_of(s: &Settings) -> Result<CaseIndex> {
    let j = s.u64("j")?.ok_or_else(|| Error::Usage("--j is required".into()))?;
    CaseIndex::new(u8::try_from(j).map_err(|_| Error::Usage(format!("j={j} outside 1..=12")))?)
}

fn tail_index(s: &Settings) -> Result<Option<TailIndex>> {
    s.f64("alpha")?.map(TailIndex::new).transpose()
}

/// Case, filter and innovations. Without `--alpha` the innovations are
/// standard Gaussian; with it they are Pareto, tapered at `n^gamma` or at a
/// fixed `b` when one of those is given, and centered when `alpha > 1`.
fn regime(s: &mut Settings) -> Result<RegimeSpec> {
    let alpha = tail_index(s)?;
    let case = case_of(s)?;
    let beta = s.default_to("beta", case.default_beta());
    let gamma1 = s.default_to("gamma1", case.default_gamma1());
    let c = s.default_to("c", 1);
    let mut r = RegimeSpec::defaults(case.value())?;
    r = r.with_beta(beta.parse().map_err(|_| Error::Usage(format!("--beta={beta} is not a number")))?)?;
    r = r.with_gamma1(gamma1.parse().map_err(|_| Error::Usage(format!("--gamma1={gamma1} is not a number")))?)?;
    r = r.with_c(c.parse().map_err(|_| Error::Usage(format!("--c={c} is not a number")))?)?;
    let taper = match (s.f64("gamma")?, s.f64("b")?) {
        (Some(_), Some(_)) => return Err(Error::Usage("give either --gamma or --b, not both".into())),
        (Some(g), None) => Some(TaperLevel::growing(g)?),
        (None, Some(b)) => Some(TaperLevel::fixed(b)?),
        (None, None) => None,
    };
    let inn = match (alpha, taper) {
        (None, None) => InnovationSpec::gaussian(),
        (None, Some(_)) => return Err(Error::Usage("--gamma and --b need --alpha".into())),
        (Some(a), None) => InnovationSpec::stable_pareto(a),
        (Some(a), Some(t)) if a.value() > 1.0 => InnovationSpec::centered_tapered(a, t),
        (Some(a), Some(t)) => InnovationSpec::tapered(a, t),
    };
    Ok(r.with_innovation(inn))
}

fn normalizer_mode(s: &mut Settings) -> Result<NormalizerMode> {
    match s.default_to("normalizer", "exact").as_str() {
        "exact" => Ok(NormalizerMode::Exact),
        "asymptotic" => Ok(NormalizerMode::Asymptotic),
        other => Err(Error::Usage(format!("--normalizer={other} must be exact or asymptotic"))),
    }
}

fn u64_or(s: &mut Settings, key: &str, default: u64) -> Result<u64> {
    match s.u64(key)? {
        Some(v) => Ok(v),
        None => {
            s.set(key, default);
            Ok(default)
        }
    }
}

fn f64_or(s: &mut Settings, key: &str, default: f64) -> Result<f64> {
    match s.f64(key)? {
        Some(v) => Ok(v),
        None => {
            s.set(key, default);
            Ok(default)
        }
    }
}

fn parse_id(v: &str) -> Result<u8> {
    let digits = v.strip_prefix(['C', 'c']).unwrap_or(v);
    digits
        .parse::<u8>()
        .ok()
        .filter(|&id| id <= 20)
        .ok_or_else(|| Error::Usage(format!("--id={v} is not one of C0..C20")))
}

/// Constants `C_id(t)`, or for `--j` the limit variance `W(t)`, the Hurst
/// index and the normalizer exponent. Rows: `quantity, j, t, beta, c, value`.
fn constants(s: &mut Settings) -> Result<Table> {
    let mut table = Table::new(&["quantity", "j", "t", "beta", "c", "value"]);
    let t_grid = times(s, &[1.0])?;
    let c = f64_or(s, "c", 1.0)?;
    if let Some(j) = s.get("j").map(str::to_string) {
        if s.has("id") {
            return Err(Error::Usage("give either --id or --j, not both".into()));
        }
        let case = case_of(s)?;
        let jv = case.value();
        let beta = f64_or(s, "beta", if jv >= 10 { 0.0 } else { case.default_beta() })?;
        let gamma1 = f64_or(s, "gamma1", case.default_gamma1())?;
        let law = GaussianLimit::new(jv, beta, c)?;
        let jcell = || Cell::Text(j.clone());
        for &t in &t_grid {
            let w = law.variance(t)?;
            table.push(vec![
                Cell::Text("W".into()),
                jcell(),
                Cell::Float(t),
                Cell::Float(beta),
                Cell::Float(c),
                Cell::Float(w),
            ]);
        }
        let h = hurst(jv, beta);
        table.push(vec![Cell::Text("H".into()), jcell(), Cell::Empty, Cell::Float(beta), Cell::Float(c), h.into()]);
        let e = normalizer_exponent(jv, beta, gamma1);
        table.push(vec![
            Cell::Text("exponent".into()),
            jcell(),
            Cell::Empty,
            Cell::Float(beta),
            Cell::Float(c),
            e.into(),
        ]);
        return Ok(table);
    }
    let beta = f64_or(s, "beta", 0.7)?;
    let ids: Vec<u8> = match s.get("id") {
        Some(v) => vec![parse_id(v)?],
        None => (0..=20).collect(),
    };
    let single = ids.len() == 1;
    for id in ids {
        for &t in &t_grid {
            let v = match constant(id, t, beta, c) {
                Ok(v) => Cell::Float(v),
                // a full listing leaves out-of-branch entries blank
                Err(Error::Domain(_)) if !single => Cell::Empty,
                Err(e) => return Err(e),
            };
            table.push(vec![
                Cell::Text(format!("C{id}")),
                Cell::Empty,
                Cell::Float(t),
                Cell::Float(beta),
                Cell::Float(c),
                v,
            ]);
        }
    }
    Ok(table)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Gaussian,
    Stable,
    Lyapunov,
    Coupling,
}

fn verify(s: &mut Settings, kind: Kind) -> Result<Outcome> {
    // the tail index is checked first so `--alpha 1` is reported as such
    let alpha = tail_index(s)?;
    if kind == Kind::Stable && alpha.is_none() {
        return Err(Error::Usage("verify stable needs --alpha".into()));
    }
    let regime = regime(s)?;
    let mut plan = ExperimentPlan::new(regime);
    plan.normalizer = normalizer_mode(s)?;
    plan.n_ladder = match s.u64_list("n")? {
        Some(v) => v,
        None => {
            s.set("n", fmt_list(&plan.n_ladder));
            plan.n_ladder.clone()
        }
    };
    plan.t_grid = times(s, &plan.t_grid.clone())?;
    plan.replicas = u64_or(s, "replicas", plan.replicas as u64)? as usize;
    plan.master_seed = u64_or(s, "seed", 0)?;
    plan.threshold = f64_or(s, "threshold", DEFAULT_THRESHOLD)?;
    plan.resamples = u64_or(s, "resamples", plan.resamples as u64)? as usize;
    let report: ComparisonReport = match kind {
        Kind::Gaussian => {
            plan.checks = vec![Check::Variance, Check::Covariance, Check::GaussianKs];
            run_gaussian_check(&plan)?
        }
        Kind::Stable => {
            plan.theta_grid = match s.f64_list("theta")? {
                Some(v) => v,
                None => {
                    s.set("theta", fmt_list(&plan.theta_grid));
                    plan.theta_grid.clone()
                }
            };
            plan.checks = vec![Check::StableCf];
            run_stable_check(&plan)?
        }
        Kind::Lyapunov => {
            plan.delta = f64_or(s, "delta", plan.delta)?;
            run_lyapunov_sweep(&plan)?
        }
        Kind::Coupling => {
            plan.r = f64_or(s, "r", plan.r)?;
            plan.coupling_method = match s.default_to("method", "sparse").as_str() {
                "sparse" => CouplingMethod::Sparse,
                "dense" => CouplingMethod::Dense,
                other => return Err(Error::Usage(format!("--method={other} must be sparse or dense"))),
            };
            run_coupling_check(&plan)?
        }
    };
    Ok(Outcome { pass: report.family_pass(), table: report_table(&report) })
}

pub fn report_table(report: &ComparisonReport) -> Table {
    let mut table =
        Table::new(&["kind", "case_j", "n", "t", "s", "theta", "estimate", "stderr", "theory", "z", "p_value", "pass"]);
    for r in &report.rows {
        table.push(vec![
            Cell::Text(r.kind.name().into()),
            Cell::Int(r.case_j.into()),
            Cell::Int(r.n),
            Cell::Float(r.t),
            r.s.into(),
            r.theta.into(),
            Cell::Float(r.estimate),
            Cell::Float(r.stderr),
            Cell::Float(r.theory),
            Cell::Float(r.z),
            r.p_value.into(),
            Cell::Bool(r.pass),
        ]);
    }
    table
}

fn path_table(paths: &[Vec<f64>], t_grid: &[f64]) -> Table {
    let mut table = Table::new(&["replica", "t", "value"]);
    for (r, p) in paths.iter().enumerate() {
        for (&t, &v) in t_grid.iter().zip(p) {
            table.push(vec![Cell::Int(r as u64), Cell::Float(t), Cell::Float(v)]);
        }
    }
    table
}

fn single_n(s: &mut Settings) -> Result<u64> {
    match s.u64_list("n")? {
        Some(v) if v.len() == 1 => Ok(v[0]),
        Some(_) => Err(Error::Usage("simulate takes a single --n".into())),
        None => u64_or(s, "n", 1 << 10),
    }
}

/// Normalized partial-sum paths `Z_n(t)`.
fn simulate_zn(s: &mut Settings) -> Result<Table> {
    let regime = regime(s)?;
    let n = single_n(s)?;
    let mode = normalizer_mode(s)?;
    let t_grid = times(s, &[0.25, 0.5, 0.75, 1.0])?;
    let replicas = u64_or(s, "replicas", 1)? as usize;
    let seed = u64_or(s, "seed", 0)?;
    let paths = simulate_normalized_replicas(&regime, n, &t_grid, replicas, seed, mode)?;
    Ok(path_table(&paths, &t_grid))
}

/// Paths of the Gaussian limit `U^(j)`.
fn simulate_limit(s: &mut Settings) -> Result<Table> {
    if s.has("alpha") {
        return Err(Error::Unsupported(
            "simulate limit covers the Gaussian limits; use simulate tfsm3 for stable paths".into(),
        ));
    }
    let case = case_of(s)?;
    let j = case.value();
    let beta = f64_or(s, "beta", if j >= 10 { 0.0 } else { case.default_beta() })?;
    let c = f64_or(s, "c", 1.0)?;
    let law = GaussianLimit::new(j, beta, c)?;
    let t_grid = times(s, &[0.25, 0.5, 0.75, 1.0])?;
    let replicas = u64_or(s, "replicas", 1)? as usize;
    let seed = u64_or(s, "seed", 0)?;
    let paths = simulate_gaussian_limit(&law, &t_grid, replicas, seed)?;
    Ok(path_table(&paths, &t_grid))
}

/// Third-kind tapered fractional Brownian (`alpha = 2`) or stable motion.
fn simulate_tf3(s: &mut Settings, brownian: bool) -> Result<Table> {
    let h = s.require_f64("H")?;
    let alpha = if brownian {
        if s.f64("alpha")?.is_some_and(|a| a != 2.0) {
            return Err(Error::Usage("tfbm3 is the alpha = 2 case; use simulate tfsm3".into()));
        }
        2.0
    } else {
        s.require_f64("alpha")?
    };
    let c = f64_or(s, "c", 1.0)?;
    let kernel = TfKernel::new(h, alpha, c)?;
    let sigma = f64_or(s, "sigma", 1.0)?;
    let skew = if alpha == 2.0 { 0.0 } else { f64_or(s, "skew", 1.0)? };
    let t_grid = times(s, &[0.25, 0.5, 0.75, 1.0])?;
    let cells = u64_or(s, "cells", tf3::DEFAULT_CELLS as u64)? as usize;
    let replicas = u64_or(s, "replicas", 1)? as usize;
    let seed = u64_or(s, "seed", 0)?;
    let paths = simulate_tfsm3(&kernel, sigma, skew, &t_grid, cells, replicas, seed)?;
    Ok(path_table(&paths, &t_grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        let mut s = Settings::default();
        for (k, v) in pairs {
            s.set(k, v);
        }
        s
    }

    fn value(t: &Table, row: usize) -> f64 {
        match t.rows[row][5] {
            Cell::Float(v) => v,
            ref c => panic!("{c:?}"),
        }
    }

    #[test]
    fn constants_examples() {
        let t = constants(&mut settings(&[("j", "8"), ("t", "0.5")])).unwrap();
        assert!((value(&t, 0) - 0.5).abs() < 1e-12);
        let t = constants(&mut settings(&[("beta", "0.5"), ("id", "C3")])).unwrap();
        assert!((value(&t, 0) - 2.0).abs() < 1e-8);
        let e = constants(&mut settings(&[("j", "7"), ("beta", "1.2")])).unwrap_err();
        assert!(matches!(e, Error::Domain(_)), "{e}");
    }

    #[test]
    fn full_listing_blanks_other_branch() {
        let t = constants(&mut settings(&[("t", "0.5,2")])).unwrap();
        assert_eq!(t.rows.len(), 42);
        assert!(t.rows.iter().any(|r| r[5] == Cell::Empty));
    }

    #[test]
    fn alpha_one_unsupported() {
        let e = verify(&mut settings(&[("alpha", "1")]), Kind::Stable).err().unwrap();
        assert!(matches!(e, Error::Unsupported(_)), "{e}");
    }

    #[test]
    fn regime_innovations() {
        let r = regime(&mut settings(&[("j", "8"), ("alpha", "1.5"), ("gamma", "0.4")])).unwrap();
        assert_eq!(r.innovation.kind, tapered_lp::InnovationKind::CenteredTaperedPareto);
        let r = regime(&mut settings(&[("j", "2"), ("alpha", "0.7")])).unwrap();
        assert_eq!(r.innovation.kind, tapered_lp::InnovationKind::Pareto);
    }

    #[test]
    fn tfsm3_alpha_two_matches_tfbm3() {
        let base = [("H", "0.8"), ("grid", "0:0.5:2"), ("replicas", "3"), ("seed", "5"), ("cells", "512")];
        let a = simulate_tf3(&mut settings(&base), true).unwrap();
        let mut s = settings(&base);
        s.set("alpha", 2);
        let b = simulate_tf3(&mut s, false).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), 12);
    }
}
