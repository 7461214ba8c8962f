//! Command-line front end for the `nsfd` solver: configuration handling,
//! β sweeps, Richardson ladders and profile export for the MHD model.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{Report, RunOptions};
pub use config::{ConfigPatch, Format, RunConfig};
pub use error::CliError;
