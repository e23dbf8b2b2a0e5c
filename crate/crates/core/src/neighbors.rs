//! Mixed-type distance and k-nearest-neighbour search.
//!
//! Distance is Euclidean over standardized numeric features plus Hamming
//! (0/1 per column) over categorical features. The label and protected
//! columns never take part. Ties in distance go to the lower row id.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ColumnKind, Dataset, Record, Value};

#[derive(Debug, Error, PartialEq)]
pub enum NeighborError {
    #[error("k = {k} must be in 1..{n}")]
    KTooLarge { k: usize, n: usize },
    #[error("every feature column is degenerate (zero variance)")]
    DegenerateFeature,
    #[error("feature matrix rows have inconsistent widths")]
    RaggedMatrix,
}

/// Encoded point: standardized numeric coordinates and categorical codes.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub num: Vec<f64>,
    pub cat: Vec<u32>,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        let sq: f64 = self.num.iter().zip(&other.num).map(|(a, b)| (a - b) * (a - b)).sum();
        let ham = self.cat.iter().zip(&other.cat).filter(|(a, b)| a != b).count();
        sq.sqrt() + ham as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NumericScale {
    column: usize,
    mean: f64,
    std: f64,
}

/// Standardization and categorical coding fitted on a reference dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    numeric: Vec<NumericScale>,
    categorical: Vec<usize>,
    codes: Vec<HashMap<String, u32>>,
    pub excluded: Vec<String>,
    pub warnings: Vec<String>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl FeatureSpace {
    /// Fits on the feature columns of `data`. Zero-variance columns are
    /// dropped with a warning; an error only if nothing is left.
    pub fn fit(data: &Dataset) -> Result<Self, NeighborError> {
        let schema = data.schema();
        let mut numeric = Vec::new();
        let mut categorical = Vec::new();
        let mut codes = Vec::new();
        let mut excluded = Vec::new();
        for i in schema.feature_indices() {
            let col = &schema.columns()[i];
            match col.kind {
                ColumnKind::Numeric => {
                    let vals: Vec<f64> = data.rows().iter().filter_map(|r| r[i].as_num()).collect();
                    let (mean, std) = mean_std(&vals);
                    if std > 0.0 {
                        numeric.push(NumericScale { column: i, mean, std });
                    } else {
                        excluded.push(col.name.clone());
                    }
                }
                ColumnKind::Categorical => {
                    let mut levels: Vec<&str> = data.rows().iter().filter_map(|r| r[i].as_cat()).collect();
                    levels.sort_unstable();
                    levels.dedup();
                    if levels.len() > 1 {
                        categorical.push(i);
                        codes.push(levels.iter().enumerate().map(|(c, l)| (l.to_string(), c as u32)).collect());
                    } else {
                        excluded.push(col.name.clone());
                    }
                }
            }
        }
        if numeric.is_empty() && categorical.is_empty() {
            return Err(NeighborError::DegenerateFeature);
        }
        let warnings = excluded.iter().map(|c| format!("feature `{c}` has zero variance; excluded from distance")).collect();
        Ok(Self { numeric, categorical, codes, excluded, warnings })
    }

    pub fn encode(&self, record: &Record) -> Point {
        let num = self
            .numeric
            .iter()
            .map(|s| (record[s.column].as_num().unwrap_or(s.mean) - s.mean) / s.std)
            .collect();
        let cat = self
            .categorical
            .iter()
            .zip(&self.codes)
            .map(|(&i, codes)| match &record[i] {
                Value::Cat(s) => codes.get(s).copied().unwrap_or(u32::MAX),
                Value::Num(_) => u32::MAX,
            })
            .collect();
        Point { num, cat }
    }

    pub fn encode_all(&self, data: &Dataset) -> Vec<Point> {
        data.rows().iter().map(|r| self.encode(r)).collect()
    }
}

/// Standardizes a purely numeric matrix column-wise, dropping constant columns.
pub fn standardize_matrix(features: &[Vec<f64>]) -> Result<(Vec<Point>, Vec<usize>), NeighborError> {
    let width = features.first().map_or(0, |r| r.len());
    if features.iter().any(|r| r.len() != width) {
        return Err(NeighborError::RaggedMatrix);
    }
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..width {
        let col: Vec<f64> = features.iter().map(|r| r[j]).collect();
        let (mean, std) = mean_std(&col);
        if std > 0.0 {
            keep.push((j, mean, std));
        } else {
            dropped.push(j);
        }
    }
    if keep.is_empty() {
        return Err(NeighborError::DegenerateFeature);
    }
    let points = features
        .iter()
        .map(|r| Point { num: keep.iter().map(|&(j, m, s)| (r[j] - m) / s).collect(), cat: Vec::new() })
        .collect();
    Ok((points, dropped))
}

/// Positions of the `k` points nearest to `probe`, nearest first.
///
/// `ids` orders ties; `exclude` removes one position (the probe itself).
pub fn k_nearest(points: &[Point], ids: &[u64], probe: &Point, k: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut scored: Vec<(f64, u64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, p)| (probe.distance(p), ids[i], i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, _, i)| i).collect()
}
