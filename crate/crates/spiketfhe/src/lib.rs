//! File formats, parallel execution and the command-line driver around
//! `spiketfhe-core`.

pub use spiketfhe_core as core;

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
