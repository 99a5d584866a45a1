//! Command-line front end: argument parsing, the echoed run configuration
//! and CSV/JSON rendering.
pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use anyhow::Result;

use crate::config::RunConfig;

/// Runs a resolved configuration and writes its output. Returns whether the
/// command's own check passed.
pub fn execute(cfg: &RunConfig) -> Result<bool> {
    let out = commands::run(cfg)?;
    output::emit(cfg, &out)?;
    if !out.summary.is_empty() {
        eprintln!("{}", out.summary);
    }
    Ok(out.ok)
}
