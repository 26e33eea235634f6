//! Scenario runner for the cachenet simulator: configuration, rate sweeps,
//! demand simulation and bit-level verification, all producing CSV.

pub mod config;
pub mod error;
pub mod gap;
pub mod run;
pub mod verify;

pub use config::{Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use gap::{gap_reduction, GapReport};
