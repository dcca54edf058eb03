//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tapered_lp::{Error, Result};

use crate::commands;
use crate::output::{emit, Format};
use crate::settings::Settings;

#[derive(Parser)]
#[command(name = "taperlp", version, about)]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "TAPERLP_THREADS")]
    pub threads: Option<usize>,
    /// Flat key=value file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long, global = true)]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constants C0..C20, limit variances, Hurst indices and exponents.
    Constants(Opts),
    /// Compare simulated normalized sums with their limits.
    #[command(subcommand)]
    Verify(Verify),
    /// Export raw paths.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Re-run the command recorded in an output file's header.
    Replay { file: PathBuf },
}

#[derive(Subcommand)]
enum Verify {
    /// Variance, covariance and normality against the Gaussian limit.
    Gaussian(Opts),
    /// Empirical characteristic function against the stable limit.
    Stable(Opts),
    /// Decay of the Lyapunov fraction along the n ladder.
    Lyapunov(Opts),
    /// Decay of the soft-taper coupling distance along the n ladder.
    Coupling(Opts),
}

#[derive(Subcommand)]
enum Simulate {
    /// Normalized partial sums Z_n(t).
    Zn(Opts),
    /// Gaussian limit processes.
    Limit(Opts),
    /// Tapered fractional Brownian motion of the third kind.
    Tfbm3(Opts),
    /// Tapered fractional stable motion of the third kind.
    Tfsm3(Opts),
}

macro_rules! opts {
    ($($field:ident : $key:literal, $help:literal;)*) => {
        /// Every parameter is kept as text and validated by the command.
        #[derive(Args, Default)]
        struct Opts {
            $(
                #[doc = $help]
                #[arg(long = $key, allow_hyphen_values = true)]
                $field: Option<String>,
            )*
        }

        impl Opts {
            fn settings(&self) -> Settings {
                let mut s = Settings::default();
                $(
                    if let Some(v) = &self.$field {
                        s.set($key, v);
                    }
                )*
                s
            }
        }
    };
}

opts! {
    j: "j", "Case index 1..=12.";
    id: "id", "Constant id, C0..C20 or 0..20.";
    beta: "beta", "Filter decay exponent.";
    gamma1: "gamma1", "Truncation exponent, lag c*n^gamma1.";
    c: "c", "Truncation scale.";
    alpha: "alpha", "Pareto tail index; Gaussian innovations when absent.";
    gamma: "gamma", "Innovation taper level n^gamma.";
    b: "b", "Fixed innovation taper level.";
    n: "n", "Sample size, or comma-separated ladder.";
    t: "t", "Comma-separated times.";
    grid: "grid", "Times a:step:b, b excluded.";
    theta: "theta", "Comma-separated CF arguments.";
    replicas: "replicas", "Monte Carlo replicas.";
    seed: "seed", "Master seed.";
    resamples: "resamples", "Bootstrap resamples.";
    threshold: "threshold", "Per-cell |z| threshold.";
    normalizer: "normalizer", "exact or asymptotic.";
    delta: "delta", "Lyapunov moment increment.";
    r: "r", "Coupling moment order.";
    method: "method", "Coupling sampler: sparse or dense.";
    h: "H", "Hurst index of the third-kind process.";
    sigma: "sigma", "Scale of the random measure.";
    skew: "skew", "Skewness intensity of the random measure.";
    cells: "cells", "Discretization cells of the third-kind process.";
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

/// Settings recorded in an output file's header.
fn read_header(path: &PathBuf) -> Result<Settings> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    let first = text.lines().next().unwrap_or("");
    if first.starts_with('{') {
        return Settings::from_json_header(first);
    }
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    Settings::parse(&header.join("\n"))
}

/// Runs the parsed command and writes its table; `Ok(false)` when the
/// checks it ran did not pass.
pub fn execute(cli: Cli) -> Result<bool> {
    let (command, flags) = match &cli.command {
        Command::Constants(o) => ("constants", o.settings()),
        Command::Verify(v) => match v {
            Verify::Gaussian(o) => ("verify-gaussian", o.settings()),
            Verify::Stable(o) => ("verify-stable", o.settings()),
            Verify::Lyapunov(o) => ("verify-lyapunov", o.settings()),
            Verify::Coupling(o) => ("verify-coupling", o.settings()),
        },
        Command::Simulate(v) => match v {
            Simulate::Zn(o) => ("simulate-zn", o.settings()),
            Simulate::Limit(o) => ("simulate-limit", o.settings()),
            Simulate::Tfbm3(o) => ("simulate-tfbm3", o.settings()),
            Simulate::Tfsm3(o) => ("simulate-tfsm3", o.settings()),
        },
        Command::Replay { .. } => ("replay", Settings::default()),
    };
    let mut s = match (&cli.command, &cli.config) {
        (Command::Replay { file }, _) => {
            let s = read_header(file)?;
            let version = env!("CARGO_PKG_VERSION");
            if s.get("version").is_some_and(|v| v != version) {
                eprintln!("warning: file was written by version {}, this is {version}", s.get("version").unwrap_or(""));
            }
            s
        }
        (_, Some(path)) => Settings::from_file(path)?,
        _ => Settings::default(),
    };
    s.overlay(flags);
    if let Some(f) = &cli.format {
        s.set("format", f);
    }
    let command = match command {
        "replay" => s.get("command").ok_or_else(|| Error::Usage("header names no command".into()))?.to_string(),
        c => c.to_string(),
    };
    if !commands::COMMANDS.contains(&command.as_str()) {
        return Err(Error::Usage(format!("unknown command {command}")));
    }
    let format = Format::parse(&s.default_to("format", "csv"))?;
    s.set("command", &command);
    s.set("version", env!("CARGO_PKG_VERSION"));
    let outcome = commands::run(&command, &mut s)?;
    emit(&outcome.table.render(format, &s), cli.out.as_deref())?;
    Ok(outcome.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Runs `taperlp args…` in-process with output captured in a file.
    fn run(args: &[&str]) -> (Result<bool>, String) {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let mut full = vec!["taperlp"];
        full.extend_from_slice(args);
        full.extend(["--out", out.to_str().unwrap()]);
        let res = execute(Cli::try_parse_from(full).unwrap());
        (res, std::fs::read_to_string(&out).unwrap_or_default())
    }

    fn run_with_threads(threads: usize, args: &[&str]) -> String {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let (res, text) = pool.install(|| run(args));
        res.unwrap();
        text
    }

    fn data_rows(text: &str) -> Vec<&str> {
        text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
    }

    fn last_field(row: &str) -> f64 {
        row.rsplit(',').next().unwrap().parse().unwrap()
    }

    fn code(res: &Result<bool>) -> u8 {
        match res {
            Ok(true) => 0,
            Ok(false) => 1,
            Err(e) => exit_code(e),
        }
    }

    #[test]
    fn constants_rows() {
        let (res, text) = run(&["constants", "--j", "8", "--t", "0.5"]);
        assert_eq!(code(&res), 0);
        let w = data_rows(&text).into_iter().find(|r| r.starts_with("W,")).unwrap();
        assert_eq!(last_field(w), 0.5);

        let (_, text) = run(&["constants", "--beta", "0.5", "--id", "C3"]);
        assert!((last_field(data_rows(&text)[0]) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn usage_domain_and_unsupported_map_to_two() {
        let (res, _) = run(&["constants", "--j", "7", "--beta", "1.2"]);
        assert!(matches!(res, Err(Error::Domain(ref m)) if m.contains("beta")));
        assert_eq!(code(&res), 2);
        let (res, _) = run(&["verify", "stable", "--alpha", "1"]);
        assert!(matches!(res, Err(Error::Unsupported(_))));
        assert_eq!(code(&res), 2);
        assert_eq!(code(&run(&["simulate", "zn", "--j", "13"]).0), 2);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
    }

    #[test]
    fn oversized_stable_plan_is_refused_with_suggestion() {
        let (res, _) = run(&["verify", "stable", "--j", "2", "--alpha", "1.5", "--n", "1e6", "--replicas", "1e5"]);
        assert!(matches!(res, Err(Error::Size(ref m)) if m.contains("replicas")), "{res:?}");
    }

    #[test]
    fn failing_checks_report_false() {
        let (res, text) =
            run(&["verify", "gaussian", "--j", "8", "--n", "256", "--replicas", "200", "--threshold", "0", "--t", "1"]);
        assert_eq!(code(&res), 1);
        assert!(data_rows(&text).iter().any(|r| r.ends_with(",false")));
    }

    #[test]
    fn tfbm3_row_count() {
        let (res, text) = run(&[
            "simulate",
            "tfbm3",
            "--H",
            "0.8",
            "--c",
            "1",
            "--grid",
            "0:0.05:2",
            "--replicas",
            "100",
            "--cells",
            "4096",
        ]);
        assert_eq!(code(&res), 0);
        assert_eq!(data_rows(&text).len(), 4000);
    }

    #[test]
    fn simulate_is_deterministic_across_threads() {
        let args = ["simulate", "zn", "--j", "8", "--n", "1024", "--seed", "1", "--replicas", "16"];
        let a = run_with_threads(1, &args);
        assert_eq!(a, run_with_threads(4, &args));
        assert_eq!(a, run(&args).1);
    }

    #[test]
    fn verify_is_deterministic_across_threads() {
        let args = ["verify", "stable", "--j", "2", "--alpha", "1.5", "--n", "512", "--replicas", "200", "--seed", "9"];
        assert_eq!(run_with_threads(1, &args), run_with_threads(3, &args));
    }

    #[test]
    fn replay_reproduces_csv_and_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        for fmt in ["csv", "jsonl"] {
            let (res, orig) = run(&["verify", "lyapunov", "--j", "2", "--n", "1024,4096", "--t", "1", "--format", fmt]);
            res.unwrap();
            let file = dir.path().join(format!("orig.{fmt}"));
            std::fs::write(&file, &orig).unwrap();
            let (res, again) = run(&["replay", file.to_str().unwrap()]);
            res.unwrap();
            assert_eq!(orig, again, "{fmt}");
        }
    }

    #[test]
    fn config_file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# constants\nj = 8\nt = 0.5\n").unwrap();
        let (res, text) = run(&["constants", "--config", cfg.to_str().unwrap(), "--t", "2"]);
        res.unwrap();
        assert!(text.contains("# t=2\n"));
        let w = data_rows(&text).into_iter().find(|r| r.starts_with("W,")).unwrap();
        assert_eq!(last_field(w), 2.0);
    }

    #[test]
    fn jsonl_rows_parse() {
        let (res, text) =
            run(&["simulate", "limit", "--j", "4", "--t", "0.5,1", "--replicas", "3", "--format", "jsonl"]);
        res.unwrap();
        let mut lines = text.lines();
        let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(header["config"]["command"], "simulate-limit");
        let rows: Vec<serde_json::Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r["value"].is_f64()));
    }

    #[test]
    fn negative_theta_values_parse() {
        let cli = Cli::try_parse_from(["taperlp", "verify", "stable", "--theta", "-1,-0.5,1"]).unwrap();
        assert!(
            matches!(cli.command, Command::Verify(Verify::Stable(ref o)) if o.theta.as_deref() == Some("-1,-0.5,1"))
        );
    }
}
