//! Scenario runner for the multiplexed-memory models.
//!
//! Each scenario reads a JSON configuration, evaluates one figure's worth
//! of data and writes `<scenario>.csv` plus `<scenario>.summary.json`.

// Range checks are written as `!(x > lo)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse_config, Scenario, ScenarioConfig};
pub use error::CliError;
pub use output::{Summary, Table};
pub use scenario::run_scenario;

/// Paths written by [`execute`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Runs `cfg` and writes its outputs under `cfg.output_path`.
pub fn execute(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<Written, CliError> {
    let scenario = cfg.scenario()?;
    let (table, summary) = run_scenario(cfg, workers)?;
    let dir: &Path = &cfg.output_path;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let written = Written {
        csv: dir.join(format!("{scenario}.csv")),
        summary: dir.join(format!("{scenario}.summary.json")),
    };
    output::emit_csv(&table, &written.csv)?;
    output::emit_json(&summary, &written.summary)?;
    Ok(written)
}
