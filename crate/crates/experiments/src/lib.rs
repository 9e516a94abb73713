//! Experiment drivers for the two-disk boundary-integral solvers: config
//! parsing, sweeps, CSV and SVG artifacts, and run records.

pub mod config;
pub mod contour;
pub mod record;
pub mod runners;

pub use config::{parse_config, ExperimentConfig, Method};
pub use record::RunRecord;
pub use runners::{run, Command, RunOutput};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] twodisk::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
