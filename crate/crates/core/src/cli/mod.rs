//! Scenario files, run artifacts (CSV log and JSON header) and SVG plots.

mod artifacts;
mod plot;
mod scenario_file;
mod schema;
mod svg;

pub use artifacts::{read_log, run_command, write_log, LogTable, RunArtifacts, RunHeader, RunOptions, LOG_COLUMNS};
pub use plot::{plot_command, PlotKind};
pub use scenario_file::{parse_scenario, parse_scenario_str};
pub use schema::schema_reference;

use std::path::PathBuf;

use thiserror::Error;

use crate::sim::{SimError, ValidationError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("simulation failed: {0}")]
    Simulation(SimError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("log is missing column {0:?}")]
    MissingColumn(String),
    #[error("malformed log: {0}")]
    Log(String),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Invalid(v) => CliError::Validation(v),
            e => CliError::Simulation(e),
        }
    }
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 invalid input, 3 simulation fault, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Io { .. } | CliError::MissingColumn(_) | CliError::Log(_) => 4,
        }
    }
}
