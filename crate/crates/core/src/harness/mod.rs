//! Experiment driver: configuration, seeded sweeps, slope fits and output
//! files.

mod config;
mod experiments;
mod fit;
mod report;

pub use config::{ClassKind, ErmSettings, Experiment, ExperimentConfig, InfluenceSettings, LossKind, StabilitySettings};
pub use experiments::{estimate_with, read_records, run, run_with_threads};
pub use fit::{fit_slope, SlopeFit};
pub use report::{write_outputs, Check, ExperimentReport, Table};
