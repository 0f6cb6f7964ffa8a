//! Configuration, experiment orchestration and run-directory output for the
//! `fdwave` command-line tool.
//!
//! A run is driven by one JSON [`RunConfig`]; [`run_experiment`] executes it
//! and writes `report.json` plus any ledgers (`ledger.csv` + `manifest.json`)
//! and snapshots into the output directory.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;

pub use config::{Experiment, RunConfig, SourceConfig, SweepAxis};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, run_trajectory, RunOutput};
pub use report::{Criterion, ExperimentReport};
