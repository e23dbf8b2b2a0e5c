use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::classifiers::TrainerConfig;
use crate::data::GeneratorConfig;
use crate::optimize::OptimizeConfig;
use crate::routing::{HumanModel, SelectionPolicy};
use crate::smote::Cell;

/// Declarative description of one experiment, read from TOML.
///
/// The master `seed` drives every sampling step of the pipeline (train/test
/// split, repair sampling, SMOTE, probe sampling, routing). The generator
/// and trainer sections keep their own seeds, which define the data and the
/// model initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub data: DataConfig,
    #[serde(default)]
    pub preprocess: Option<PreprocessConfig>,
    #[serde(default)]
    pub train: Option<TrainerConfig>,
    #[serde(default)]
    pub postprocess: Option<PostprocessConfig>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub audit: Option<AuditConfig>,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    /// Intervention stacks for `compare`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<StackConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub generate: Option<GeneratorConfig>,
    #[serde(default)]
    pub csv: Option<CsvSource>,
    /// Fraction of rows held out for evaluation; 0 evaluates on the
    /// training rows.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Equal-width bins per numeric feature when a finite domain is needed.
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_test_fraction() -> f64 {
    0.3
}

fn default_bins() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub path: PathBuf,
    /// Schema file (`name kind role` lines plus directives).
    pub schema: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreprocessConfig {
    None,
    Massage,
    Optimize {
        /// Columns the repair map acts on. Defaults to `["proxy"]` for
        /// generated data; required for CSV input.
        #[serde(default)]
        features: Option<Vec<String>>,
        problem: OptimizeConfig,
    },
    Smote {
        #[serde(default = "default_smote_k")]
        k: usize,
        #[serde(default = "default_smote_cell")]
        cell: Cell,
        /// Rows to add; enough to match the largest cell when unset.
        #[serde(default)]
        count: Option<usize>,
    },
}

fn default_smote_k() -> usize {
    crate::smote::DEFAULT_K
}

fn default_smote_cell() -> Cell {
    Cell { privileged: false, favorable: true }
}

impl PreprocessConfig {
    pub fn name(&self) -> &'static str {
        match self {
            PreprocessConfig::None => "none",
            PreprocessConfig::Massage => "massage",
            PreprocessConfig::Optimize { .. } => "optimize",
            PreprocessConfig::Smote { .. } => "smote",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PostprocessConfig {
    RejectOption {
        theta: f64,
    },
    /// The trained model plus `members` vote; disagreement triggers the
    /// group rule.
    Ensemble {
        members: Vec<TrainerConfig>,
    },
}

impl PostprocessConfig {
    pub fn name(&self) -> &'static str {
        match self {
            PostprocessConfig::RejectOption { .. } => "reject_option",
            PostprocessConfig::Ensemble { .. } => "ensemble",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    /// Neighbours for the consistency metric.
    #[serde(default = "default_k")]
    pub k: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { k: default_k() }
    }
}

fn default_k() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeSource {
    #[default]
    Test,
    Train,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub probes: ProbeSource,
    /// Random subsample of the probe rows; all of them when unset.
    #[serde(default)]
    pub max_probes: Option<usize>,
    /// Model retrained on both datasets; the `train` section when unset.
    #[serde(default)]
    pub trainer: Option<TrainerConfig>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { k: default_k(), probes: ProbeSource::Test, max_probes: None, trainer: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub consent_rate: f64,
    pub ai_fraction_cap: f64,
    #[serde(default)]
    pub human_model: HumanModel,
    #[serde(default)]
    pub policy: SelectionPolicy,
    #[serde(default)]
    pub n_matters: Option<usize>,
}

/// One row of a comparison sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    pub name: String,
    #[serde(default)]
    pub preprocess: Option<PreprocessConfig>,
    /// The top-level `train` section (or default logistic) when unset.
    #[serde(default)]
    pub train: Option<TrainerConfig>,
    #[serde(default)]
    pub postprocess: Option<PostprocessConfig>,
}

/// Serialized run record; also accepted as a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch. The only field that differs between runs.
    pub timestamp: u64,
    pub command: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub artifacts: Vec<String>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, PipelineError> {
        toml::from_str(text)
            .map_err(|e| PipelineError::ConfigParse { path: origin.to_string(), message: e.to_string().trim().replace('\n', " | ") })
    }

    /// Reads a TOML config, or the `config` block of a JSON manifest.
    /// Relative CSV paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::ConfigParse { path: origin.clone(), message: e.to_string() })?;
        let mut config = if path.extension().is_some_and(|e| e == "json") {
            let m: Manifest = serde_json::from_str(&text)
                .map_err(|e| PipelineError::ConfigParse { path: origin.clone(), message: e.to_string() })?;
            m.config
        } else {
            Self::from_toml(&text, &origin)?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.validate(&origin)?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(csv) = &mut self.data.csv {
            for p in [&mut csv.path, &mut csv.schema] {
                if p.is_relative() {
                    let joined = base.join(&*p);
                    *p = joined.canonicalize().unwrap_or(joined);
                }
            }
        }
    }

    /// Checks that do not need the data: one data source, referenced files
    /// exist, stage prerequisites are present.
    pub fn validate(&self, origin: &str) -> Result<(), PipelineError> {
        let err = |m: String| Err(PipelineError::ConfigParse { path: origin.to_string(), message: m });
        match (&self.data.generate, &self.data.csv) {
            (Some(_), Some(_)) => return err("data: set exactly one of `generate` and `csv`".into()),
            (None, None) => return err("data: missing `generate` or `csv`".into()),
            (None, Some(csv)) => {
                for (field, p) in [("data.csv.path", &csv.path), ("data.csv.schema", &csv.schema)] {
                    if !p.exists() {
                        return err(format!("{field}: file not found: {}", p.display()));
                    }
                }
            }
            (Some(_), None) => {}
        }
        if !(0.0..1.0).contains(&self.data.test_fraction) {
            return err(format!("data.test_fraction = {} is not in [0, 1)", self.data.test_fraction));
        }
        if self.data.bins == 0 {
            return err("data.bins must be positive".into());
        }
        let stacks: Vec<(&Option<PreprocessConfig>, &Option<PostprocessConfig>, bool)> =
            std::iter::once((&self.preprocess, &self.postprocess, self.train.is_some()))
                .chain(self.sweep.iter().map(|s| (&s.preprocess, &s.postprocess, true)))
                .collect();
        for (pre, post, trained) in stacks {
            if let Some(PreprocessConfig::Optimize { problem, .. }) = pre {
                if problem.distortion_budget.is_none() {
                    return err(
                        "preprocess.problem.distortion_budget: missing; the distortion budget c has no default and must be set explicitly"
                            .into(),
                    );
                }
            }
            if post.is_some() && !trained {
                return err("postprocess requires a `train` section".into());
            }
            if let Some(PostprocessConfig::Ensemble { members }) = post {
                if members.is_empty() {
                    return err("postprocess.members: the ensemble needs at least one member besides the trained model".into());
                }
            }
        }
        for s in &self.sweep {
            let ok = !s.name.is_empty() && s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !ok {
                return err(format!("sweep.name `{}`: use letters, digits, `_` or `-`", s.name));
            }
        }
        if self.simulate.is_some() && self.train.is_none() {
            return err("simulate requires a `train` section".into());
        }
        Ok(())
    }
}
