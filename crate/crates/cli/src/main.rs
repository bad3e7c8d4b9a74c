use std::fmt::Display;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod config;
mod input;
mod output;

use args::{Cli, Command};

/// Failure of a command, carrying its exit code class.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// unreadable or malformed input (exit 1)
    #[error("{0}")]
    Parse(String),
    /// an iterative method or estimator did not reach its tolerance (exit 2)
    #[error("{0}")]
    Convergence(String),
    /// invalid flags, configuration or output path (exit 3)
    #[error("{0}")]
    Config(String),
}

impl Failure {
    pub fn parse(msg: impl Display) -> Self {
        Self::Parse(msg.to_string())
    }

    pub fn config(msg: impl Display) -> Self {
        Self::Config(msg.to_string())
    }

    pub fn code(&self) -> u8 {
        match self {
            Self::Parse(_) => 1,
            Self::Convergence(_) => 2,
            Self::Config(_) => 3,
        }
    }
}

impl From<vne_core::Error> for Failure {
    fn from(e: vne_core::Error) -> Self {
        use vne_core::Error as E;
        match e {
            E::Parse { .. } | E::Io(_) | E::NotPositiveSemidefinite(_) => Self::Parse(e.to_string()),
            E::CgNoConvergence { .. }
            | E::KrylovNoConvergence { .. }
            | E::BudgetExceeded { .. }
            | E::EigNoConvergence
            | E::NotPositiveDefinite(_) => Self::Convergence(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

fn run() -> Result<(), Failure> {
    let argv = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let msg = e.render().to_string();
            return Err(Failure::config(msg.trim_start_matches("error: ").trim_end()));
        }
    };
    match cli.command {
        Command::Entropy(a) => commands::entropy_report(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::ColorStats(a) => commands::color_stats(a),
        Command::ProbingSweep(a) => commands::probing_sweep(a),
        Command::BenchScaling(a) => commands::bench_scaling(a),
        Command::KrylovTrace(a) => commands::krylov_trace(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
