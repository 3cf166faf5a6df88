//! Library half of the `aomsim` command-line tool: report types, number
//! formatting and the subcommand implementations.

pub mod commands;
pub mod fmt;
pub mod report;
