//! Configuration, dispatch and file output for the `magnon-sim` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod svg;

pub use config::{apply_override, parse_config_file, parse_config_str, RunConfig, Subcommand};
pub use error::CliError;
pub use run::{render, run};
pub use svg::{render_heatmap, HeatmapStyle};
