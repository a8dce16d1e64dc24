//! `mclock`: compute, sample and check measurement-timing scenarios.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 failed check.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mclock", version, about = "When does a quantum measurement happen?")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute P(t) and p(t) on the scenario grid and write `t,P,p` CSV.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the external joint q/pointer reading and write the estimate report CSV.
    Sample {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write one row per trial.
        #[arg(long)]
        trials_out: Option<PathBuf>,
    },
    /// Validate the premeasurement, the projector and dP/dt = <m> on the grid.
    Check {
        scenario: PathBuf,
        /// Fidelity every outcome must reach; defaults to the model's declared fidelity.
        #[arg(long)]
        min_fidelity: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out } => commands::run(&scenario, &out),
        Command::Sample {
            scenario,
            out,
            trials_out,
        } => commands::sample(&scenario, &out, trials_out.as_deref()),
        Command::Check {
            scenario,
            min_fidelity,
        } => commands::check(&scenario, min_fidelity),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mclock: {e}");
            ExitCode::from(e.code())
        }
    }
}
