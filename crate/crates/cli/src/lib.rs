//! Command-line front end: test-problem generation, rectangle estimation,
//! certified evaluation and experiment sweeps, all exchanging plain files
//! (Matrix Market matrices, text vectors, JSON and CSV).

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod sweep;

pub use error::{CliError, Result};
