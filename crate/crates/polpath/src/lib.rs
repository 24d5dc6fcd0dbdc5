//! File formats, self-test harness and command-line driver for `polpath-core`.
//!
//! Density matrices, Stokes sets, count records and reconstruction results are JSON;
//! fringe tables are CSV. See [`io`] and [`fringe`] for the layouts.

pub mod cli;
pub mod error;
pub mod fringe;
pub mod io;
pub mod selftest;

pub use error::{CliError, Result};
