//! Library side of the `spacobi` command-line tool.
//!
//! Each subcommand is a plain function taking its parsed arguments, so
//! tests can drive the tool without spawning processes. `main.rs` only
//! parses arguments, sizes the thread pool and maps errors to exit codes.

pub mod args;
pub mod commands;
pub mod config;
pub mod schema;

use spacobi::admm::FitError;
use spacobi::io::IoError;
use spacobi::select::SelectError;
use thiserror::Error;

pub use args::{Cli, Command};
pub use commands::{cmd_eval, cmd_fit, cmd_heatmap, cmd_path, cmd_simulate, cmd_tune, Evaluation, SimSidecar};

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "SPACOBI_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable input or configuration.
    #[error("{0}")]
    Parse(String),
    /// The fit failed or stopped at the iteration cap. Artifacts written
    /// before the error remain on disk.
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } | IoError::Render(_) => CliError::Io(e.to_string()),
            IoError::Parse { .. } | IoError::Empty | IoError::Json(_) => CliError::Parse(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::InvalidConfig(_) | FitError::InvalidState(_) | FitError::ShapeMismatch { .. } => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::NotConverged(e.to_string()),
        }
    }
}

impl From<SelectError> for CliError {
    fn from(e: SelectError) -> Self {
        match e {
            SelectError::Fit(f) => f.into(),
            SelectError::NothingSelectable => CliError::NotConverged(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Path(a) => cmd_path(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Heatmap(a) => cmd_heatmap(a),
    }
}

/// Sizes the global pool from `SPACOBI_THREADS` when it is set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("{THREADS_ENV}={value} is not a thread count")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Parse(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}
