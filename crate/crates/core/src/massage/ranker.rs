//! Categorical naive Bayes with Laplace smoothing, used to rank rows by
//! how likely they are to carry the favorable label.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::{bin_numeric, BinEdges, Dataset, DEFAULT_BINS};

use super::MassageError;

/// Smoothing pseudo-count added to every (feature value, class) cell.
pub const LAPLACE_ALPHA: f64 = 1.0;

/// Fitted per-feature likelihood tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesRanker {
    columns: Vec<usize>,
    edges: Vec<BinEdges>,
    /// log P(class), index 0 = unfavorable.
    log_prior: [f64; 2],
    /// log P(value | class) per column; unseen values use `log_unseen`.
    log_lik: Vec<HashMap<String, [f64; 2]>>,
    log_unseen: Vec<[f64; 2]>,
}

impl NaiveBayesRanker {
    /// Fits on every feature column; the protected column is never used.
    /// Numeric features are equal-width binned first.
    pub fn fit(data: &Dataset) -> Result<Self, MassageError> {
        let (binned, edges) = bin_numeric(data, DEFAULT_BINS, None)?;
        let labels = binned.labels();
        let n_pos = labels.iter().filter(|&&y| y).count();
        let n_neg = labels.len() - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Err(MassageError::SingleClassDataset);
        }
        let class_n = [n_neg as f64, n_pos as f64];
        let total = labels.len() as f64;
        let columns = binned.schema().feature_indices();
        let mut log_lik = Vec::with_capacity(columns.len());
        let mut log_unseen = Vec::with_capacity(columns.len());
        for &c in &columns {
            let mut counts: HashMap<String, [f64; 2]> = HashMap::new();
            for (row, &y) in binned.rows().iter().zip(&labels) {
                counts.entry(row[c].to_string()).or_insert([0.0; 2])[y as usize] += 1.0;
            }
            let levels = counts.len() as f64;
            let denom = [class_n[0] + LAPLACE_ALPHA * levels, class_n[1] + LAPLACE_ALPHA * levels];
            let table = counts
                .into_iter()
                .map(|(v, k)| {
                    let l = [((k[0] + LAPLACE_ALPHA) / denom[0]).ln(), ((k[1] + LAPLACE_ALPHA) / denom[1]).ln()];
                    (v, l)
                })
                .collect();
            log_lik.push(table);
            log_unseen.push([(LAPLACE_ALPHA / denom[0]).ln(), (LAPLACE_ALPHA / denom[1]).ln()]);
        }
        Ok(Self {
            columns,
            edges,
            log_prior: [(class_n[0] / total).ln(), (class_n[1] / total).ln()],
            log_lik,
            log_unseen,
        })
    }

    /// Posterior P(favorable | features) for every row, binning numeric
    /// features with the edges fitted at training time.
    pub fn score(&self, data: &Dataset) -> Result<Vec<f64>, MassageError> {
        let (binned, _) = bin_numeric(data, DEFAULT_BINS, Some(&self.edges))?;
        Ok(self.score_binned(&binned))
    }

    /// Posterior P(favorable | features) for every row of `binned`.
    fn score_binned(&self, binned: &Dataset) -> Vec<f64> {
        binned
            .rows()
            .iter()
            .map(|row| {
                let mut lp = self.log_prior;
                for ((&c, table), unseen) in self.columns.iter().zip(&self.log_lik).zip(&self.log_unseen) {
                    let l = table.get(&row[c].to_string()).unwrap_or(unseen);
                    lp[0] += l[0];
                    lp[1] += l[1];
                }
                1.0 / (1.0 + (lp[0] - lp[1]).exp())
            })
            .collect()
    }
}

/// Per-row positive-class scores from a ranker fitted on `data` itself.
pub fn rank_samples(data: &Dataset) -> Result<Vec<f64>, MassageError> {
    if data.is_empty() {
        return Err(MassageError::SingleClassDataset);
    }
    NaiveBayesRanker::fit(data)?.score(data)
}
