//! Command-line front end of the micromaser detector simulator: configuration
//! files, subcommand execution, CSV and manifest output.

pub mod commands;
pub mod config;
pub mod output;
