pub mod config;
pub mod report;
pub mod run;

pub use config::{Cli, ConfigError, ExperimentConfig};
pub use report::Report;
pub use run::run;
