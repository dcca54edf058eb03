//! `taperlp`: constants, Monte Carlo verification and path export for
//! linear processes with truncated filters and tapered innovations.

use std::process::ExitCode;

use clap::Parser;
use tapered_lp_cli::app::{execute, exit_code, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("checks failed: family-wise pass fraction below threshold");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
