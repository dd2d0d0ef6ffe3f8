//! `calrm`: bounds, policy simulation and experiments for stage-aware network revenue management.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Bad input, a failed precondition, or a usage mistake.
const EXIT_VALIDATION: u8 = 2;
/// The LP solver did not reach an optimal basis.
const EXIT_SOLVER: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Bounds(a) => commands::bounds(&cli, a),
        Command::Simulate(a) => commands::simulate(&cli, a),
        Command::Experiment(a) => commands::experiment(&cli, a),
        Command::SweepGamma(a) => commands::sweep_gamma(&cli, a),
        Command::Generate(a) => commands::generate(&cli, a),
        Command::Calibrate(a) => commands::calibrate(&cli, a),
        Command::DumpLp(a) => commands::dump_lp(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use calrm_core::Error;
    if err.downcast_ref::<commands::UsageError>().is_some() {
        return EXIT_VALIDATION;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Lp(_) | Error::UnexpectedStatus(_)) => EXIT_SOLVER,
        Some(_) => EXIT_VALIDATION,
        None => 1,
    }
}
