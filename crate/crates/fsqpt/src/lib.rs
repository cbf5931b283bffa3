//! Configuration, CSV tables and orchestration for the `fsqpt` command line.
//!
//! The numerical work lives in `fsqpt-core`; this crate adds what needs an
//! operating system: files, JSON, threads and exit codes.

pub mod cli;
pub mod config;
pub mod io;
pub mod run;

pub use config::ExperimentConfig;
