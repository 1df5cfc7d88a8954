//! File-level plumbing: load a config, run its experiment, emit CSV plus a
//! JSON summary, and map the outcome to an exit status.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::experiments::{run_experiment, ExperimentOutput};

/// Failure modes the binary maps to exit codes.
#[derive(Debug)]
pub enum RunError {
    /// Unreadable/invalid config or an experiment precondition violation
    /// (exit 2).
    Config(String),
    /// Filesystem trouble while writing artifacts (exit 2).
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

/// What a completed run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub experiment: &'static str,
    pub passed: bool,
    pub failed_assertions: Vec<String>,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Loads a config file, applies an optional seed override, runs the
/// experiment, and writes `<out>/<experiment>.csv` and
/// `<out>/<experiment>_summary.json`.
pub fn run_file(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<RunSummary, RunError> {
    let raw = fs::read_to_string(config_path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let mut cfg = ExperimentConfig::parse(&raw).map_err(RunError::Config)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let config_hash = hex_digest(raw.as_bytes());
    run_config(&cfg, &config_hash, out_dir)
}

/// Runs an already-parsed config. `config_hash` is echoed into the summary
/// so artifacts can be traced back to their exact inputs.
pub fn run_config(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
) -> Result<RunSummary, RunError> {
    let output = run_experiment(cfg).map_err(RunError::Config)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Io(format!("cannot create {}: {e}", out_dir.display())))?;

    let name = cfg.experiment.name();
    let csv_path = out_dir.join(format!("{name}.csv"));
    let summary_path = out_dir.join(format!("{name}_summary.json"));
    write_csv(&csv_path, &output)?;
    write_summary(&summary_path, cfg, config_hash, &output)?;

    Ok(RunSummary {
        experiment: name,
        passed: output.passed(),
        failed_assertions: output
            .assertions
            .iter()
            .filter(|a| !a.passed)
            .map(|a| a.name.clone())
            .collect(),
        csv_path,
        summary_path,
    })
}

fn write_csv(path: &Path, output: &ExperimentOutput) -> Result<(), RunError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(|e| RunError::Io(e.to_string()))?;
    writer
        .write_record(&output.header)
        .map_err(|e| RunError::Io(e.to_string()))?;
    for row in &output.rows {
        writer
            .write_record(row)
            .map_err(|e| RunError::Io(e.to_string()))?;
    }
    writer.flush().map_err(|e| RunError::Io(e.to_string()))
}

fn write_summary(
    path: &Path,
    cfg: &ExperimentConfig,
    config_hash: &str,
    output: &ExperimentOutput,
) -> Result<(), RunError> {
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "config_sha256": config_hash,
        "config": cfg,
        "scalars": output.scalars,
        "assertions": output.assertions,
        "passed": output.passed(),
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| RunError::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| RunError::Io(e.to_string()))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
