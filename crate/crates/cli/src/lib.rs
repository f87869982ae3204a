//! Scenario files, baseline versus variant experiments and their CSV output.

pub mod config;
pub mod experiment;

pub use config::{parse_config, parse_with_overrides, ConfigError, Protocol, ScenarioConfig};
pub use experiment::{compare, run_experiment, Comparison, RunError, RunResult, CSV_HEADER};
