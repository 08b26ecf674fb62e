//! Experiment runner for the PIMAC toolkit: named sweeps over the builtin
//! channel realizations, CSV rows and a JSON summary with reference checks.

pub mod channel;
pub mod config;
pub mod experiments;
pub mod record;

pub use channel::{load_channel, parse_channel, ChannelError};
pub use config::{ExperimentConfig, ExperimentId, Grid, Mode, SolverOverrides};
pub use experiments::{execute, run_experiment};
pub use record::{Check, CurvePoint, Report};

use pimac::model::ModelError;
use pimac::power_min::PowerError;
use pimac::rate_region::RegionError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
