//! File formats, run configuration and command drivers behind the `mwis`
//! binary. Every command returns a JSON report whose shape is published in
//! `schema/report.schema.json`.

pub mod commands;
pub mod config;
pub mod format;
pub mod report;

pub use commands::{run_command, CliError, Output};
pub use config::{Command, RunConfig};

/// Path of the report schema inside this crate.
pub const REPORT_SCHEMA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json");
