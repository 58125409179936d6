//! File formats, configuration and the batch pipeline around `oim-core`.
//!
//! The library side of the `oim` binary: a flat key=value run configuration,
//! the `oimesh` text format with line-numbered validation errors, CSV field
//! export, deterministic JSON output with 17-significant-digit floats, and
//! the three entry points behind the CLI subcommands (`solve`, `oracle`,
//! `nfinfo`).

pub mod config;
pub mod fieldio;
pub mod jsonout;
pub mod meshio;
pub mod runner;
