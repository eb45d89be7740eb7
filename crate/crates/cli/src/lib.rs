//! Scenario files, run artifacts and the `heol-sim` command line.

pub mod app;
pub mod config;
pub mod output;
pub mod plot;

pub use app::{main_with, CliError};
pub use config::{ConfigError, RawConfig};
pub use output::{MetricsReport, OutputBundle, CSV_HEADER};
