//! The `linkmine` pipeline: stage orchestration over a plain-file store,
//! configuration, and CSV exports.

pub mod cli;
pub mod config;
pub mod echo;
pub mod error;
pub mod export;
pub mod stage;
pub mod store;

pub use cli::main_with_args;
pub use config::{ClassifierMode, PipelineConfig, TransportMode};
pub use error::{CliError, CliResult};
pub use stage::{Pipeline, Stage, StageOutcome};
