//! `qread`: batch front-end for the reading bounds.
//!
//! Exit status: 0 success, 1 check or certification failure, 2 usage or config error.

// `!(x >= 0.0)` is how NaN gets rejected along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::Config;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qread", version, about = "Error bounds, information gain and critical signal numbers for quantum reading")]
struct Cli {
    /// TOML file overriding the defaults (see --show-config).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the effective configuration and exit.
    #[arg(long)]
    show_config: bool,

    /// Upper end of the bath-temperature search.
    #[arg(long, global = true)]
    nb_max: Option<f64>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gain for the reference table rows, plus any extra rows.
    GainTable(commands::GainTableArgs),
    /// Bounds and gain at one parameter point.
    GainPoint(commands::GainPointArgs),
    /// Critical number of signals against pit reflectivity (ideal memories).
    CriticalCurve(commands::CriticalCurveArgs),
    /// Solver against the high-energy approximation at r0 = 0.
    AsymptoteCompare(commands::AsymptoteArgs),
    /// Cross-check the Gaussian formulas against the Fock-space oracle.
    OracleCheck(commands::OracleCheckArgs),
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut config = Config::load(cli.config.as_deref())?;
    if let Some(n_b_max) = cli.nb_max {
        if !(n_b_max > 0.0) || !n_b_max.is_finite() {
            return Err(CliError::Usage(format!("--nb-max must be positive, got {n_b_max}")));
        }
        config.solver.n_b_max = n_b_max;
    }
    if cli.show_config {
        print!("{}", config.to_toml());
        return Ok(Outcome::Ok);
    }
    match &cli.command {
        Some(Command::GainTable(a)) => commands::gain_table(a, &config),
        Some(Command::GainPoint(a)) => commands::gain_point(a, &config),
        Some(Command::CriticalCurve(a)) => commands::critical_curves(a, &config),
        Some(Command::AsymptoteCompare(a)) => commands::asymptote_compare(a, &config),
        Some(Command::OracleCheck(a)) => commands::oracle_check(a, &config),
        None => Err(CliError::Usage("no subcommand given (try --help)".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
