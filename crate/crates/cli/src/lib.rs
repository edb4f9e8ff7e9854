//! Command-line harness around the `fcpo` library: benchmark matrices,
//! statistics reports and the calibration demo. The `fcpo` binary is a thin
//! argument parser over these modules.

pub mod config;
pub mod error;
pub mod harness;
pub mod report;
pub mod twin_demo;

pub use config::{CaseSpec, HarnessConfig};
pub use error::{CliError, CliResult};
