//! Scenario runner and file formats around `gamow-lab-core`.
//!
//! Scenarios are JSON files (see `scenarios/reference.json`); curves are
//! written as CSV and reports as JSON, one directory per run named by the
//! config digest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod verify;

pub use config::{load_config, ConfigError, Scenario, ScenarioConfig};
pub use run::{run, RunOptions, RunReport, Status};
