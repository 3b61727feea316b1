//! Scenario runner for the vortex-rings library: JSON configs in, CSV/JSON/binary
//! artifacts and a manifest out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod scenario;

pub use config::{validate_config, Mode, ScenarioConfig};
pub use error::CliError;
pub use scenario::{run_scenario, Manifest};
