//! Command-line front end: TOML run configs in, deterministic CSV artifacts out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use commands::{cmd_bounds, cmd_design, cmd_mc, design_file_name, solve};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
