//! Library side of the `bubbles` command: argument definitions, the
//! subcommands, JSON/CSV/SVG output and machine-readable error records.

pub mod args;
pub mod commands;
pub mod failure;
pub mod io;
pub mod render;

pub use args::{Cli, Command};
pub use commands::run;
pub use failure::{CliError, Outcome};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0;
