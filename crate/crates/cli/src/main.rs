//! `rinv`: command-line front-end for the retrial inventory engine.
//!
//! Exit codes: 0 success, 1 usage/parse/invalid input, 2 unstable or
//! boundary model, 3 simulation divergence.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "rinv",
    version,
    about = "Retrial inventory system with server failures in a random environment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scenario file and list every violation.
    Validate { scenario: PathBuf },
    /// Traffic intensity, drift and stability verdict.
    Stability {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Truncated steady state and performance measures.
    Solve {
        scenario: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Also write the generator blocks of this level as CSV (needs --out).
        #[arg(long, value_name = "LEVEL")]
        dump_blocks: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Event-driven simulation with replication confidence intervals.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Analytic and simulated measures side by side.
    Report {
        scenario: PathBuf,
        /// Merge into one table with relative differences and CI coverage.
        #[arg(long)]
        compare: bool,
        /// Read report.json and simulation.json from this directory
        /// instead of computing them.
        #[arg(long, value_name = "DIR")]
        from: Option<PathBuf>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct SolveArgs {
    /// Maximum orbit size kept by the solver.
    #[arg(long, value_name = "R")]
    truncation: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct SimArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    warmup: Option<f64>,
    /// Orbit size at which a replication is declared divergent.
    #[arg(long)]
    orbit_cap: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Table,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
