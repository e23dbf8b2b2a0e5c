//! Config-driven experiments.
//!
//! A run executes ingest, pre-processing, training, post-processing,
//! metrics, audit and simulation in that order, skipping absent stages, and
//! returns every artifact as bytes so callers decide where they land.
//! Artifacts are deterministic functions of the config; the manifest's
//! timestamp is the only field that varies between runs.

mod config;
mod report;
mod run;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub use config::{
    AuditConfig, CsvSource, DataConfig, Manifest, MetricsConfig, PipelineConfig, PostprocessConfig, PreprocessConfig,
    ProbeSource, SimulateConfig, StackConfig,
};
pub use report::{ComparisonRow, DataSummary, DatasetMetrics, Knobs, ModelMetrics, PipelineReport, PreprocessSummary, RoutingReport};
pub use run::{compare_interventions, run_pipeline, CompareOutcome, RunOutcome};

pub const TOOL: &str = "repairlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("config error in {path}: {message}")]
    ConfigParse { path: String, message: String },
    #[error("stage `{stage}` failed: {message}")]
    StageFailure { stage: String, message: String },
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<&'a str>,
    message: &'a str,
}

impl PipelineError {
    pub(crate) fn stage(stage: &str, e: impl std::fmt::Display) -> Self {
        PipelineError::StageFailure { stage: stage.to_string(), message: e.to_string() }
    }

    /// Process exit code: 2 for config errors, 3 for stage and write failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::ConfigParse { .. } => 2,
            PipelineError::StageFailure { .. } | PipelineError::Io { .. } => 3,
        }
    }

    /// Single-line JSON rendering for machine consumers.
    pub fn to_json_line(&self) -> String {
        let line = match self {
            PipelineError::ConfigParse { path, message } => {
                ErrorLine { error: "config_parse", path: Some(path), stage: None, message }
            }
            PipelineError::StageFailure { stage, message } => {
                ErrorLine { error: "stage_failure", path: None, stage: Some(stage), message }
            }
            PipelineError::Io { path, message } => ErrorLine { error: "io", path: Some(path), stage: None, message },
        };
        serde_json::to_string(&line).expect("error line serializes")
    }
}

/// Named file contents; names may contain `/` for subdirectories.
pub type Artifacts = BTreeMap<String, Vec<u8>>;

/// Writes every artifact under `dir`, creating directories as needed.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> Result<(), PipelineError> {
    for (name, bytes) in artifacts {
        let path = dir.join(name);
        let io = |e: std::io::Error| PipelineError::Io { path: path.display().to_string(), message: e.to_string() };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        std::fs::write(&path, bytes).map_err(io)?;
    }
    Ok(())
}

/// Builds `manifest.json` for a finished run.
pub fn manifest(config: &PipelineConfig, command: &str, artifacts: &Artifacts) -> Vec<u8> {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let m = Manifest {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        timestamp,
        command: command.to_string(),
        seed: config.seed,
        config: config.clone(),
        artifacts: artifacts.keys().cloned().collect(),
    };
    let mut out = serde_json::to_vec_pretty(&m).expect("manifest serializes");
    out.push(b'\n');
    out
}
