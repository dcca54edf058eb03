//! Library side of the `taperlp` binary: settings, output tables and the
//! subcommands, kept here so they can be exercised in-process.

pub mod app;
pub mod commands;
pub mod output;
pub mod settings;
