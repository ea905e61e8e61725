//! Scenario runner and command line for `pulseforge-core`.
//!
//! A run is described by a JSON [`ScenarioConfig`] layered over the defaults
//! of a registered scenario. [`run_scenario`] optimizes in memory and
//! [`run_and_persist`] also writes the result directory.

pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod runner;
pub mod scenario;

pub use config::{ModelKind, Plan, ScenarioConfig};
pub use error::{AppError, Result};
pub use parallel::Parallel;
pub use runner::{
    fidelity_sweep, run_and_persist, run_scenario, simulate, time_sweep, Outcome, TimeRun, ResultRecord, SweepSource,
};
pub use scenario::REGISTERED;
