use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::data::{Dataset, Record};
use crate::neighbors::{k_nearest, FeatureSpace};

/// Scores a row by the share of favorable labels among its `k` nearest
/// training rows (same metric and tie rule as the consistency metric).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub space: FeatureSpace,
    pub rows: Vec<Record>,
    pub labels: Vec<bool>,
    pub row_ids: Vec<u64>,
}

pub fn fit_knn(data: &Dataset, k: usize) -> Result<KnnModel, ClassifierError> {
    if k == 0 || k > data.len() {
        return Err(ClassifierError::InvalidConfig(format!("k = {k} must be in 1..={}", data.len())));
    }
    let space = FeatureSpace::fit(data).map_err(|e| ClassifierError::InvalidConfig(e.to_string()))?;
    Ok(KnnModel { k, space, rows: data.rows().to_vec(), labels: data.labels(), row_ids: data.row_ids().to_vec() })
}

impl KnnModel {
    pub fn score(&self, data: &Dataset) -> Vec<f64> {
        let train: Vec<_> = self.rows.iter().map(|r| self.space.encode(r)).collect();
        data.rows()
            .iter()
            .map(|r| {
                let probe = self.space.encode(r);
                let nn = k_nearest(&train, &self.row_ids, &probe, self.k, None);
                nn.iter().filter(|&&i| self.labels[i]).count() as f64 / nn.len() as f64
            })
            .collect()
    }
}
