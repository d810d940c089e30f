//! `bernstein`: Bernstein approximations on convex polytopes from the command line.

mod commands;
mod error;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands::{ApproxArgs, BergmanArgs, ExpansionArgs, RateArgs, Smooth1dArgs};
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "bernstein", version, about = "Bernstein measures and approximations on convex polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for per-point parallelism (output does not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// B_N(f) on a grid: CSV (x, N, bernstein, f, error).
    Approx(ApproxArgs),
    /// Remainders of the asymptotic expansion and their log-log slopes: CSV.
    Expansion(ExpansionArgs),
    /// Large-deviation rates, closed form and Legendre transform: CSV.
    Rate(RateArgs),
    /// The smooth measure on [0, 1]: CSV with the Voronovskaya columns.
    Smooth1d(Smooth1dArgs),
    /// Bergman-Bernstein balance checks and the Riemann identity: JSON.
    Bergman(BergmanArgs),
    /// List the built-in polytopes: JSON.
    Presets,
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot start thread pool: {e}")))?;
    }
    let text = match &cli.command {
        Command::Approx(a) => commands::approx(a)?,
        Command::Expansion(a) => commands::expansion(a)?,
        Command::Rate(a) => commands::rate(a)?,
        Command::Smooth1d(a) => commands::smooth1d(a)?,
        Command::Bergman(a) => commands::bergman(a)?,
        Command::Presets => commands::presets(),
    };
    output::emit(cli.out.as_deref(), &text)
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("{}", err.record());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
