//! Group and individual fairness measures, plus accuracy.
//!
//! Group vectors use `true` for the privileged group; outcome vectors use
//! `true` for the favorable outcome.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neighbors::{k_nearest, standardize_matrix, NeighborError, Point};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("the {0} group is empty")]
    EmptyGroup(&'static str),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("prediction {0} is outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error(transparent)]
    Neighbors(#[from] NeighborError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupPair<T> {
    pub unprivileged: T,
    pub privileged: T,
}

/// Favorable-rate comparison between the two groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupParity {
    /// Unprivileged rate over privileged rate; `+inf` when only the
    /// privileged rate is zero, `1.0` when both are.
    pub ratio: f64,
    /// Unprivileged rate minus privileged rate.
    pub difference: f64,
    pub rates: GroupPair<f64>,
    pub counts: GroupPair<usize>,
}

pub fn disparate_impact(outcomes: &[bool], groups: &[bool]) -> Result<GroupParity, MetricError> {
    if outcomes.len() != groups.len() {
        return Err(MetricError::LengthMismatch(outcomes.len(), groups.len()));
    }
    let mut n = [0usize; 2];
    let mut pos = [0usize; 2];
    for (&y, &g) in outcomes.iter().zip(groups) {
        n[g as usize] += 1;
        pos[g as usize] += y as usize;
    }
    if n[0] == 0 {
        return Err(MetricError::EmptyGroup("unprivileged"));
    }
    if n[1] == 0 {
        return Err(MetricError::EmptyGroup("privileged"));
    }
    let unpriv = pos[0] as f64 / n[0] as f64;
    let priv_ = pos[1] as f64 / n[1] as f64;
    let ratio = if priv_ > 0.0 {
        unpriv / priv_
    } else if unpriv > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(GroupParity {
        ratio,
        difference: unpriv - priv_,
        rates: GroupPair { unprivileged: unpriv, privileged: priv_ },
        counts: GroupPair { unprivileged: n[0], privileged: n[1] },
    })
}

pub fn accuracy(predictions: &[bool], truth: &[bool]) -> Result<f64, MetricError> {
    if predictions.len() != truth.len() {
        return Err(MetricError::LengthMismatch(predictions.len(), truth.len()));
    }
    if predictions.is_empty() {
        return Err(MetricError::Empty);
    }
    let agree = predictions.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(agree as f64 / predictions.len() as f64)
}

/// `1 - mean_i |p_i - mean_{j in kNN(i)} p_j|` on a numeric feature matrix.
///
/// Columns are standardized first; zero-variance columns are dropped.
pub fn consistency(predictions: &[f64], features: &[Vec<f64>], k: usize) -> Result<f64, MetricError> {
    if predictions.len() != features.len() {
        return Err(MetricError::LengthMismatch(predictions.len(), features.len()));
    }
    let (points, _) = standardize_matrix(features)?;
    let ids: Vec<u64> = (0..points.len() as u64).collect();
    consistency_on_points(predictions, &points, &ids, k)
}

/// Consistency over already-encoded points (see [`crate::neighbors`]).
pub fn consistency_on_points(
    predictions: &[f64],
    points: &[Point],
    ids: &[u64],
    k: usize,
) -> Result<f64, MetricError> {
    let n = predictions.len();
    if n != points.len() || n != ids.len() {
        return Err(MetricError::LengthMismatch(n, points.len()));
    }
    if k == 0 || k >= n {
        return Err(NeighborError::KTooLarge { k, n }.into());
    }
    if let Some(&bad) = predictions.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(MetricError::ScoreOutOfRange(bad));
    }
    let total: f64 = (0..n)
        .map(|i| {
            let nn = k_nearest(points, ids, &points[i], k, Some(i));
            let mean = nn.iter().map(|&j| predictions[j]).sum::<f64>() / k as f64;
            (predictions[i] - mean).abs()
        })
        .sum();
    Ok((1.0 - total / n as f64).clamp(0.0, 1.0))
}

/// Serializable metric bundle for a dataset or a set of decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    #[serde(with = "crate::serde_float")]
    pub disparate_impact_ratio: f64,
    pub statistical_parity_difference: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<f64>,
    pub group_positive_rates: GroupPair<f64>,
    pub counts: GroupPair<usize>,
}

impl FairnessReport {
    pub fn from_parity(parity: &GroupParity) -> Self {
        Self {
            disparate_impact_ratio: parity.ratio,
            statistical_parity_difference: parity.difference,
            accuracy: None,
            consistency: None,
            group_positive_rates: parity.rates,
            counts: parity.counts,
        }
    }

    pub const CSV_HEADER: &'static str = "disparate_impact_ratio,statistical_parity_difference,accuracy,consistency,positive_rate_unprivileged,positive_rate_privileged,count_unprivileged,count_privileged";

    /// One data line matching [`Self::CSV_HEADER`]; absent metrics are empty.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let ratio = if self.disparate_impact_ratio.is_infinite() {
            "inf".to_string()
        } else {
            self.disparate_impact_ratio.to_string()
        };
        format!(
            "{ratio},{},{},{},{},{},{},{}",
            self.statistical_parity_difference,
            opt(self.accuracy),
            opt(self.consistency),
            self.group_positive_rates.unprivileged,
            self.group_positive_rates.privileged,
            self.counts.unprivileged,
            self.counts.privileged
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}
