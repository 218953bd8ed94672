//! File formats, command-line driver and HTTP service for the termscape
//! workbench. The numerics live in `termscape-core`; [`pipeline`] is the
//! shared layer that both the CLI and the service call.

pub mod atomic;
pub mod cli;
pub mod config;
pub mod error;
pub mod files;
pub mod formats;
pub mod pipeline;
pub mod service;

pub use error::{Result, WorkbenchError};
