use serde::{Deserialize, Serialize};

use crate::audit::AuditSummary;
use crate::classifiers::TrainerConfig;
use crate::data::BinEdges;
use crate::metrics::FairnessReport;
use crate::optimize::{Budget, Epsilon};
use crate::routing::{BlindnessReport, RoutingSummary};

use super::{PipelineConfig, PostprocessConfig, PreprocessConfig};

/// Every fairness knob of the run, surfaced at the top of the report.
/// Knobs that do not apply are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knobs {
    pub distortion_budget: Option<Budget>,
    pub epsilon: Option<Epsilon>,
    pub theta: Option<f64>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub consent_rate: Option<f64>,
    pub ai_fraction_cap: Option<f64>,
}

impl Knobs {
    pub fn collect(
        config: &PipelineConfig,
        pre: Option<&PreprocessConfig>,
        train: Option<&TrainerConfig>,
        post: Option<&PostprocessConfig>,
    ) -> Self {
        let (distortion_budget, epsilon) = match pre {
            Some(PreprocessConfig::Optimize { problem, .. }) => {
                (problem.distortion_budget.clone(), Some(problem.epsilon.clone()))
            }
            _ => (None, None),
        };
        let theta = match post {
            Some(PostprocessConfig::RejectOption { theta }) => Some(*theta),
            _ => None,
        };
        let (eta, lambda) = match train {
            Some(TrainerConfig::PrejudiceRemover { prejudice, .. }) => (Some(prejudice.eta), None),
            Some(TrainerConfig::Adversarial(c)) => (None, Some(c.lambda)),
            _ => (None, None),
        };
        Self {
            distortion_budget,
            epsilon,
            theta,
            eta,
            lambda,
            consent_rate: config.simulate.as_ref().map(|s| s.consent_rate),
            ai_fraction_cap: config.simulate.as_ref().map(|s| s.ai_fraction_cap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub source: String,
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    /// `test`, or `train` when nothing was held out.
    pub evaluated_on: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bin_edges: Vec<BinEdges>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetrics {
    /// Training labels before any repair.
    pub original: FairnessReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repaired: Option<FairnessReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreprocessSummary {
    None,
    Massage {
        m: usize,
        promotions: usize,
        demotions: usize,
    },
    Optimize {
        features: Vec<String>,
        objective: f64,
        max_violation: f64,
        converged: bool,
        iterations: usize,
        check_passed: bool,
    },
    Smote {
        privileged: bool,
        favorable: bool,
        added: usize,
        k_used: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub trainer: String,
    /// Thresholded model output on the evaluation rows.
    pub raw: FairnessReport,
    /// After post-processing; equal to `raw` without it.
    #[serde(rename = "final")]
    pub final_: FairnessReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postprocess: Option<String>,
    pub interventions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingReport {
    pub summary: RoutingSummary,
    pub blindness: BlindnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub stages: Vec<String>,
    pub knobs: Knobs,
    pub data: DataSummary,
    pub dataset: DatasetMetrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocess: Option<PreprocessSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<RoutingReport>,
    pub warnings: Vec<String>,
}

impl PipelineReport {
    /// `scope` column followed by the fairness-report columns.
    pub fn to_csv(&self) -> String {
        let mut out = format!("scope,{}\n", FairnessReport::CSV_HEADER);
        let mut row = |scope: &str, r: &FairnessReport| out.push_str(&format!("{scope},{}\n", r.csv_row()));
        row("dataset_original", &self.dataset.original);
        if let Some(r) = &self.dataset.repaired {
            row("dataset_repaired", r);
        }
        if let Some(m) = &self.model {
            row("model_raw", &m.raw);
            row("model_final", &m.final_);
        }
        out
    }
}

/// One line of `comparison.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub stack: String,
    pub preprocess: String,
    pub train: String,
    pub postprocess: String,
    pub accuracy: f64,
    #[serde(with = "crate::serde_float")]
    pub disparate_impact_ratio: f64,
    pub statistical_parity_difference: f64,
    pub consistency: f64,
    pub audit_decision_change_rate: f64,
}

impl ComparisonRow {
    pub const CSV_HEADER: &'static str = "stack,preprocess,train,postprocess,accuracy,disparate_impact_ratio,statistical_parity_difference,consistency,audit_decision_change_rate";

    pub fn csv_row(&self) -> String {
        let ratio =
            if self.disparate_impact_ratio.is_infinite() { "inf".to_string() } else { self.disparate_impact_ratio.to_string() };
        format!(
            "{},{},{},{},{},{ratio},{},{},{}",
            self.stack,
            self.preprocess,
            self.train,
            self.postprocess,
            self.accuracy,
            self.statistical_parity_difference,
            self.consistency,
            self.audit_decision_change_rate
        )
    }

    pub fn to_csv(rows: &[ComparisonRow]) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}
