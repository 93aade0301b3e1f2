//! Reproducible generate → plan → evaluate runs on synthetic scenarios,
//! plus anchor clustering.

pub mod cluster;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod generate;
pub mod io;
pub mod plan;

pub use error::{CliError, Result};
