//! Precedent audit: how a repair changes the neighbourhood of a probe case.
//!
//! Neighbours are always found in the original data, with the metric of
//! [`crate::neighbors`]. Each neighbour's label and features are then diffed
//! against its repaired counterpart (matched by row id), and the probe is
//! scored by two models with identical configuration, one trained on each
//! dataset.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{train, ClassifierError, Model, TrainerConfig};
use crate::data::{DataError, Dataset, Record};
use crate::neighbors::{k_nearest, FeatureSpace, NeighborError, Point};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("row id {0} of the original data is missing from the repaired data")]
    RowIdMismatch(u64),
    #[error("k = {k} must be in 1..{n}")]
    KTooLarge { k: usize, n: usize },
    #[error("probe does not match the schema: {0}")]
    ProbeSchema(String),
    #[error("column `{0}` is missing from the repaired data")]
    MissingColumn(String),
    #[error(transparent)]
    Neighbor(#[from] NeighborError),
    #[error("training failed: {0}")]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// A case to audit. Carrying the `row_id` of an original row excludes that
/// row from its own neighbourhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub row_id: Option<u64>,
    pub record: Record,
}

impl Probe {
    pub fn from_row(data: &Dataset, position: usize) -> Self {
        Self { row_id: Some(data.row_id(position)), record: data.row(position).clone() }
    }

    /// Every row of `data` as a probe, in row order.
    pub fn all_rows(data: &Dataset) -> Vec<Self> {
        (0..data.len()).map(|i| Self::from_row(data, i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborDiff {
    pub row_id: u64,
    pub original_label: bool,
    pub repaired_label: bool,
    pub flipped: bool,
    /// Number of feature columns whose value changed.
    pub distortion: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFinding {
    pub probe_row_id: Option<u64>,
    pub neighbors: Vec<NeighborDiff>,
    pub flip_rate: f64,
    pub mean_distortion: f64,
    pub score_original: f64,
    pub score_repaired: f64,
    pub decision_original: bool,
    pub decision_repaired: bool,
    pub decision_changed: bool,
}

impl AuditFinding {
    pub fn flipped_ids(&self) -> Vec<u64> {
        self.neighbors.iter().filter(|n| n.flipped).map(|n| n.row_id).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub count: usize,
    /// Set when there were no probes; both rates are then 0.
    pub empty: bool,
    pub k: usize,
    pub trainer: String,
    pub mean_flip_rate: f64,
    pub mean_distortion: f64,
    pub decision_change_rate: f64,
}

impl AuditSummary {
    pub fn from_findings(findings: &[AuditFinding], k: usize, trainer: &str) -> Self {
        let n = findings.len();
        let mean = |f: &dyn Fn(&AuditFinding) -> f64| {
            if n == 0 {
                0.0
            } else {
                findings.iter().map(f).sum::<f64>() / n as f64
            }
        };
        Self {
            count: n,
            empty: n == 0,
            k,
            trainer: trainer.to_string(),
            mean_flip_rate: mean(&|f| f.flip_rate),
            mean_distortion: mean(&|f| f.mean_distortion),
            decision_change_rate: mean(&|f| f.decision_changed as u8 as f64),
        }
    }
}

/// Shared state for auditing many probes: the neighbour index over the
/// original data and the two trained models.
#[derive(Debug, Clone)]
pub struct Auditor<'a> {
    original: &'a Dataset,
    repaired: &'a Dataset,
    repaired_pos: Vec<usize>,
    feature_map: Vec<(usize, usize)>,
    space: FeatureSpace,
    points: Vec<Point>,
    k: usize,
    trainer: String,
    model_original: Model,
    model_repaired: Model,
}

impl<'a> Auditor<'a> {
    pub fn new(original: &'a Dataset, repaired: &'a Dataset, k: usize, trainer: &TrainerConfig) -> Result<Self, AuditError> {
        let n = original.len();
        if k == 0 || k >= n {
            return Err(AuditError::KTooLarge { k, n });
        }
        let index: HashMap<u64, usize> = repaired.id_index();
        let repaired_pos = original
            .row_ids()
            .iter()
            .map(|id| index.get(id).copied().ok_or(AuditError::RowIdMismatch(*id)))
            .collect::<Result<Vec<_>, _>>()?;
        let schema = original.schema();
        let mut feature_map = Vec::new();
        for i in schema.feature_indices() {
            let name = &schema.columns()[i].name;
            let j = repaired.schema().index_of(name).ok_or_else(|| AuditError::MissingColumn(name.clone()))?;
            feature_map.push((i, j));
        }
        let space = FeatureSpace::fit(original)?;
        let points = space.encode_all(original);
        let model_original = train(trainer, original)?;
        let model_repaired = train(trainer, repaired)?;
        Ok(Self {
            original,
            repaired,
            repaired_pos,
            feature_map,
            space,
            points,
            k,
            trainer: trainer.name().to_string(),
            model_original,
            model_repaired,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Neighbour positions in the original data, nearest first.
    pub fn neighbors(&self, probe: &Probe) -> Result<Vec<usize>, AuditError> {
        self.check_probe(probe)?;
        let exclude = probe.row_id.and_then(|id| self.original.row_ids().iter().position(|&r| r == id));
        let point = self.space.encode(&probe.record);
        Ok(k_nearest(&self.points, self.original.row_ids(), &point, self.k, exclude))
    }

    fn check_probe(&self, probe: &Probe) -> Result<(), AuditError> {
        let cols = self.original.schema().columns();
        if probe.record.len() != cols.len() {
            return Err(AuditError::ProbeSchema(format!("{} values for {} columns", probe.record.len(), cols.len())));
        }
        Ok(())
    }

    fn probe_dataset(&self, probe: &Probe) -> Result<Dataset, AuditError> {
        Dataset::from_parts(
            self.original.schema().clone(),
            vec![probe.record.clone()],
            vec![probe.row_id.unwrap_or(0)],
            vec![false],
        )
        .map_err(|e| AuditError::ProbeSchema(e.to_string()))
    }

    pub fn audit(&self, probe: &Probe) -> Result<AuditFinding, AuditError> {
        let nn = self.neighbors(probe)?;
        let neighbors: Vec<NeighborDiff> = nn
            .iter()
            .map(|&i| {
                let j = self.repaired_pos[i];
                let (a, b) = (self.original.row(i), self.repaired.row(j));
                let distortion = self.feature_map.iter().filter(|&&(ci, cj)| a[ci] != b[cj]).count();
                let original_label = self.original.label_of(i);
                let repaired_label = self.repaired.label_of(j);
                NeighborDiff {
                    row_id: self.original.row_id(i),
                    original_label,
                    repaired_label,
                    flipped: original_label != repaired_label,
                    distortion,
                }
            })
            .collect();
        let k = neighbors.len() as f64;
        let flip_rate = neighbors.iter().filter(|n| n.flipped).count() as f64 / k;
        let mean_distortion = neighbors.iter().map(|n| n.distortion as f64).sum::<f64>() / k;
        let single = self.probe_dataset(probe)?;
        let score_original = self.model_original.predict(&single)?.scores[0];
        let score_repaired = self.model_repaired.predict(&single)?.scores[0];
        let decision_original = score_original >= 0.5;
        let decision_repaired = score_repaired >= 0.5;
        Ok(AuditFinding {
            probe_row_id: probe.row_id,
            neighbors,
            flip_rate,
            mean_distortion,
            score_original,
            score_repaired,
            decision_original,
            decision_repaired,
            decision_changed: decision_original != decision_repaired,
        })
    }

    pub fn sweep(&self, probes: &[Probe]) -> Result<(Vec<AuditFinding>, AuditSummary), AuditError> {
        let findings = probes.iter().map(|p| self.audit(p)).collect::<Result<Vec<_>, _>>()?;
        let summary = AuditSummary::from_findings(&findings, self.k, &self.trainer);
        Ok((findings, summary))
    }
}

pub fn audit_probe(
    original: &Dataset,
    repaired: &Dataset,
    probe: &Probe,
    k: usize,
    trainer: &TrainerConfig,
) -> Result<AuditFinding, AuditError> {
    Auditor::new(original, repaired, k, trainer)?.audit(probe)
}

/// Audits each probe; both models are trained once for the whole sweep.
pub fn audit_sweep(
    original: &Dataset,
    repaired: &Dataset,
    probes: &[Probe],
    k: usize,
    trainer: &TrainerConfig,
) -> Result<(Vec<AuditFinding>, AuditSummary), AuditError> {
    Auditor::new(original, repaired, k, trainer)?.sweep(probes)
}

/// One JSON object per line.
pub fn findings_jsonl(findings: &[AuditFinding]) -> String {
    let mut out = String::new();
    for f in findings {
        out.push_str(&serde_json::to_string(f).expect("findings serialize"));
        out.push('\n');
    }
    out
}
