//! Experiment harness for the pursuit solvers: flat key/value configs,
//! (solver, η, seed) grids executed under an effective-pass budget, and CSV
//! metric tables suitable for plotting convergence traces.
//!
//! The pipeline is [`parse_config`] → [`run_experiment`] → [`emit_csv`].
//! Runs on a grid are independent and may execute concurrently; rows are
//! gathered in a fixed order so concurrency never changes output bytes.

mod config;
mod csv;
mod run;

pub use config::{
    parse_config, parse_synthetic, DataSource, EtaSpec, ExperimentConfig, SolverEntry, SolverName,
};
pub use csv::{emit_csv, CSV_HEADER};
pub use run::{
    estimation_error, eta_grid, lipschitz_estimate, objective_gap, run_experiment, MetricRow,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] rgrasp::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn io_error(path: &std::path::Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}
