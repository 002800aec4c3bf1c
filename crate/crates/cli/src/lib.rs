//! Experiment runner library: configuration parsing, command execution, and
//! the acceptance suite. The `mfc` binary is a thin dispatcher over these.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod runners;
