//! Library half of the `rankcomplex` binary: file formats, reports and the
//! subcommand implementations.

pub mod args;
pub mod commands;
pub mod error;
pub mod grid_file;
pub mod report;
pub mod spec_file;
