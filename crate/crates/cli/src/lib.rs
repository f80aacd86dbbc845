//! Command-line shell around `threshreg`: CSV ingestion, the three
//! subcommands and their JSON or plain-text reports.

pub mod args;
pub mod commands;
pub mod data;
pub mod error;
pub mod report;
