//! From-scratch scorers: logistic regression, the prejudice-remover
//! regularized variant, an adversarially debiased two-head network, plus
//! naive Bayes and k-nearest-neighbour baselines.
//!
//! Every trainer is full-batch and deterministic: the same data, config
//! and seed give bitwise-identical weights and loss histories.

mod adversarial;
mod encoder;
mod knn;
mod logistic;
mod prejudice;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::massage::{MassageError, NaiveBayesRanker};

pub use adversarial::{fit_adversarial, AdversarialConfig, AdversarialModel, EpochStats, Network};
pub use encoder::{EncodedColumn, Encoder};
pub use knn::{fit_knn, KnnModel};
pub use logistic::{fit_logistic, linear, logistic_objective, sigmoid, LogisticConfig, LogisticModel, LOSS_SLACK};
pub use prejudice::{fit_prejudice_remover, prejudice_index, prejudice_objective, PrejudiceConfig};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training data has a single label value")]
    SingleClassDataset,
    #[error("training data has a single protected group")]
    SingleGroupDataset,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("data does not fit the model encoding: {0}")]
    EncodingMismatch(String),
    #[error("invalid trainer config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

pub(crate) fn check_classes(data: &Dataset) -> Result<(), ClassifierError> {
    let labels = data.labels();
    if labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
        return Err(ClassifierError::SingleClassDataset);
    }
    Ok(())
}

pub(crate) fn check_groups(data: &Dataset) -> Result<(), ClassifierError> {
    let groups = data.groups();
    if groups.iter().all(|&g| g) || groups.iter().all(|&g| !g) {
        return Err(ClassifierError::SingleGroupDataset);
    }
    Ok(())
}

fn default_k() -> usize {
    crate::metrics::DEFAULT_K
}

/// Which scorer to train, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainerConfig {
    Logistic(LogisticConfig),
    PrejudiceRemover {
        #[serde(default)]
        logistic: LogisticConfig,
        #[serde(default)]
        prejudice: PrejudiceConfig,
    },
    Adversarial(AdversarialConfig),
    NaiveBayes,
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig::Logistic(LogisticConfig::default())
    }
}

impl TrainerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TrainerConfig::Logistic(_) => "logistic",
            TrainerConfig::PrejudiceRemover { .. } => "prejudice_remover",
            TrainerConfig::Adversarial(_) => "adversarial",
            TrainerConfig::NaiveBayes => "naive_bayes",
            TrainerConfig::Knn { .. } => "knn",
        }
    }
}

/// A trained scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Logistic(LogisticModel),
    Adversarial(AdversarialModel),
    NaiveBayes(NaiveBayesRanker),
    Knn(KnnModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Favorable-outcome scores in `[0, 1]`.
    pub scores: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Prediction {
    /// Default decisions: `score >= 0.5`.
    pub fn decisions(&self) -> Vec<bool> {
        self.scores.iter().map(|&s| s >= 0.5).collect()
    }
}

pub fn train(config: &TrainerConfig, data: &Dataset) -> Result<Model, ClassifierError> {
    Ok(match config {
        TrainerConfig::Logistic(c) => Model::Logistic(fit_logistic(data, c)?),
        TrainerConfig::PrejudiceRemover { logistic, prejudice } => {
            Model::Logistic(fit_prejudice_remover(data, prejudice, logistic)?)
        }
        TrainerConfig::Adversarial(c) => Model::Adversarial(fit_adversarial(data, c)?),
        TrainerConfig::NaiveBayes => Model::NaiveBayes(NaiveBayesRanker::fit(data).map_err(map_massage)?),
        TrainerConfig::Knn { k } => Model::Knn(fit_knn(data, *k)?),
    })
}

fn map_massage(e: MassageError) -> ClassifierError {
    match e {
        MassageError::SingleClassDataset => ClassifierError::SingleClassDataset,
        MassageError::Data(d) => ClassifierError::Data(d),
        other => ClassifierError::InvalidConfig(other.to_string()),
    }
}

impl Model {
    pub fn predict(&self, data: &Dataset) -> Result<Prediction, ClassifierError> {
        match self {
            Model::Logistic(m) => {
                let (x, warnings) = m.encoder.encode(data)?;
                Ok(Prediction { scores: m.score_encoded(&x), warnings })
            }
            Model::Adversarial(m) => {
                let (x, warnings) = m.encoder.encode(data)?;
                Ok(Prediction { scores: m.network.predictor_scores(&x), warnings })
            }
            Model::NaiveBayes(m) => Ok(Prediction { scores: m.score(data).map_err(map_massage)?, warnings: Vec::new() }),
            Model::Knn(m) => Ok(Prediction { scores: m.score(data), warnings: Vec::new() }),
        }
    }
}
