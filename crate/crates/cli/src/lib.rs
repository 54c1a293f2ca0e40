//! `bstable`: seeded simulation, fixed-point solving and tail verification
//! for branching stable processes, driven by TOML experiment files.
//!
//! Exit codes: 0 success, 2 verification failure, 3 invalid input, 4 I/O
//! error, 5 solver non-convergence.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

pub use config::{preset, Experiment, ExperimentConfig};
pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "bstable", version, about = "Maxima of branching stable processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print c and kappa for (alpha, beta).
    Constants {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Simulate independent trees and summarize their maxima.
    Simulate {
        #[command(flatten)]
        source: commands::Source,
    },
    /// Solve for u(x) = P(M >= x) on the configured grid.
    Solve {
        #[command(flatten)]
        source: commands::Source,
        /// Also write the (e, l, s) sample used by the solver.
        #[arg(long)]
        save_cloud: bool,
    },
    /// Check simulated and solved tails against the predicted power laws.
    Verify {
        #[command(flatten)]
        source: commands::Source,
        /// Shift the predicted exponent before checking.
        #[arg(long, allow_hyphen_values = true)]
        target_exponent_offset: Option<f64>,
        /// Fail instead of simulating when no matching runs.csv exists.
        #[arg(long)]
        require_artifacts: bool,
    },
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Invalid("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Invalid(e.to_string()))
            .map(|pool| pool.install(f)),
    }
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Constants { alpha, beta } => commands::constants(alpha, beta),
        Command::Simulate { source } => {
            let exp = source.experiment()?;
            with_threads(source.threads, || commands::simulate(&exp))?
        }
        Command::Solve { source, save_cloud } => {
            let exp = source.experiment()?;
            with_threads(source.threads, || commands::solve(&exp, save_cloud))?
        }
        Command::Verify {
            source,
            target_exponent_offset,
            require_artifacts,
        } => {
            let mut exp = source.experiment()?;
            if let Some(offset) = target_exponent_offset {
                let mut config = exp.config.clone();
                config.verify.target_exponent_offset = offset;
                exp = config.resolve()?;
            }
            with_threads(source.threads, || commands::verify(&exp, require_artifacts))?
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INVALID_INPUT } else { exit::PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            print!("{out}");
            exit::PASS
        }
        Err(e) => {
            eprintln!("bstable: {e}");
            e.exit_code()
        }
    }
}
