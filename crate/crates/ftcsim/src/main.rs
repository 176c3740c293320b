//! Thin command-line front end over the library runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ftcsim::runner::{self, RunContext};

#[derive(Parser)]
#[command(name = "ftcsim", version, about = "Fluxonium-transmon coupler simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration file.
    #[arg(long, global = true, default_value = "configs/table_i_run.toml")]
    config: PathBuf,
    /// Output directory for data files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker-thread cap for sweep grids.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Override the configured pseudo-random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the per-node truncation level.
    #[arg(long, global = true)]
    levels: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Dressed spectrum, ZZ-crosstalk and delocalization at the idle point.
    Spectrum,
    /// Pairwise ZZ over a coupler flux grid.
    ZzMap,
    /// Fabrication-robustness maps over coupler energy errors.
    Robustness,
    /// Simulate one flux pulse and report infidelity and leakage.
    Gate,
    /// Optimize pulse parameters against closed-system infidelity.
    Optimize,
    /// Analytic drive coefficients and closed-form gate predictions.
    Analyze,
    /// Three-qubit chain analysis with a spectator qubit.
    Spectator,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = match RunContext::load(&cli.config, &cli.out, cli.threads, cli.seed, cli.levels) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.command {
        Command::Spectrum => runner::cmd_spectrum(&ctx),
        Command::ZzMap => runner::cmd_zz_map(&ctx),
        Command::Robustness => runner::cmd_robustness(&ctx),
        Command::Gate => runner::cmd_gate(&ctx),
        Command::Optimize => runner::cmd_optimize(&ctx),
        Command::Analyze => runner::cmd_analyze(&ctx),
        Command::Spectator => runner::cmd_spectator(&ctx),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
