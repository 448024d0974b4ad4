//! Scenario orchestration: configuration, the fixed-step simulation loop,
//! telemetry, metrics and parameter sweeps.

mod config;
mod ideal;
mod metrics;
mod run;
mod sweep;
mod telemetry;

pub use config::{load_config, save_config, InitialState, OutputConfig, ScenarioConfig};
pub use ideal::{IdealLoop, IdealState};
pub use metrics::{metrics, Metrics};
pub use run::{run, run_to_files};
pub use sweep::{sweep, with_param};
pub use telemetry::{write_csv, write_csv_to, Diagnostics, TelemetryLog, TelemetryRow, CSV_HEADER};

use crate::allocation::AllocationError;
use crate::controller::ControllerError;
use crate::plant::PlantError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),
    #[error("controller failed at t = {t:.4} s: {source}")]
    Controller {
        t: f64,
        source: ControllerError,
        partial: Box<TelemetryLog>,
    },
    #[error("allocation failed at t = {t:.4} s: {source}")]
    Allocation {
        t: f64,
        source: AllocationError,
        partial: Box<TelemetryLog>,
    },
    #[error("plant failed at t = {t:.4} s: {source}")]
    Plant {
        t: f64,
        source: PlantError,
        partial: Box<TelemetryLog>,
    },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },
    #[error("sweep parameter `{param}`: {message}")]
    Sweep { param: String, message: String },
    #[error("empty log")]
    EmptyLog,
}

impl SimError {
    /// Telemetry recorded before a failure inside the loop.
    pub fn partial_log(&self) -> Option<&TelemetryLog> {
        match self {
            SimError::Controller { partial, .. }
            | SimError::Allocation { partial, .. }
            | SimError::Plant { partial, .. } => Some(partial),
            _ => None,
        }
    }
}
