//! `nmsqueeze`: spectra, propagators, squeezing curves, scaling tables and
//! Husimi maps for a spin ensemble coupled to a structured reservoir.

mod commands;
mod config;
mod csv;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{EtaSweep, DEFAULT_EVERY};
use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nmsqueeze", version, about = "Non-Markovian spin squeezing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound-state energy and residue over an η sweep (spectrum.csv).
    Spectrum {
        #[command(flatten)]
        flags: Overrides,
        #[arg(long, default_value_t = 0.0)]
        eta_min: f64,
        #[arg(long, default_value_t = 0.1)]
        eta_max: f64,
        #[arg(long, default_value_t = 0.001)]
        eta_step: f64,
    },
    /// Single-spin propagator u(t) and its rates (propagator.csv).
    Propagate {
        #[command(flatten)]
        flags: Overrides,
        /// Spacing of written samples.
        #[arg(long, default_value_t = DEFAULT_EVERY)]
        every: f64,
    },
    /// Squeezing parameter along the trajectory (squeeze.csv, squeeze.json).
    Squeeze {
        #[command(flatten)]
        flags: Overrides,
        #[arg(long, default_value_t = DEFAULT_EVERY)]
        every: f64,
    },
    /// Long-time squeezing against N (scaling.csv).
    Scaling {
        #[command(flatten)]
        flags: Overrides,
        /// Comma-separated ensemble sizes.
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
        n_list: Vec<usize>,
    },
    /// Husimi Q maps at the listed times (husimi_t{k}.csv and .json).
    Husimi {
        #[command(flatten)]
        flags: Overrides,
        /// Comma-separated times; defaults to 0 and t_max.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NMSQZ_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("NMSQZ_THREADS = `{raw}` must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(command: Command) -> Result<(), CliError> {
    configure_threads()?;
    let written = match command {
        Command::Spectrum { flags, eta_min, eta_max, eta_step } => {
            let cfg = RunConfig::resolve(&flags)?;
            vec![commands::spectrum(&cfg, &EtaSweep { min: eta_min, max: eta_max, step: eta_step })?]
        }
        Command::Propagate { flags, every } => vec![commands::propagate(&RunConfig::resolve(&flags)?, every)?],
        Command::Squeeze { flags, every } => vec![commands::squeeze(&RunConfig::resolve(&flags)?, every)?],
        Command::Scaling { flags, n_list } => vec![commands::scaling(&RunConfig::resolve(&flags)?, &n_list)?],
        Command::Husimi { flags, times } => {
            let cfg = RunConfig::resolve(&flags)?;
            let times = if times.is_empty() { vec![0.0, cfg.t_max] } else { times };
            commands::husimi(&cfg, &times)?
        }
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nmsqueeze: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
