//! File formats, seeded ensemble runners and the `decolab` command line on
//! top of [`decolab_core`].
//!
//! - [`formats`]: JSON files for states, information types and channels.
//! - [`ensemble`]: deterministic parallel map over instance indices.
//! - [`suites`]: the verification suites behind `decolab verify`.
//! - [`commands`]: measures and parameter scans behind the other subcommands.
//! - [`output`]: CSV tables with fixed 12-significant-digit numbers.
//! - [`cli`]: argument parsing and exit codes.

pub use decolab_core as core;

pub mod cli;
pub mod commands;
pub mod ensemble;
pub mod formats;
pub mod output;
pub mod suites;
