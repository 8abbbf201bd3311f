//! Experiment configuration, verification suites and CSV/SVG output for the
//! `granot` command-line tool.

pub mod config;
pub mod emit;
pub mod error;
pub mod report;
pub mod run;
pub mod suites;

pub use error::{HarnessError, Result};
