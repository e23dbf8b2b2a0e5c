//! Randomized repair maps over finite domains.
//!
//! A [`RepairMap`] is a conditional distribution over repaired `(x̃, ỹ)`
//! for every observed source cell `(x, y, z)`. [`solve_repair_map`] picks
//! the map minimizing the total-variation distance between the repaired and
//! empirical `(X, Y)` distributions, subject to
//!
//! - group parity: `|P(Ỹ = y | Z = z) - p_T(y)| <= eps[y][z]`, and
//! - a per-cell distortion budget: `E[cost | x, y, z] <= c[x, y, z]`.
//!
//! [`check_repair_map`] re-verifies a map from scratch and [`apply_repair`]
//! samples a repaired dataset from it.

mod apply;
mod check;
mod config;
mod problem;
pub mod simplex;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, JointDistribution};

pub use apply::apply_repair;
pub use check::{check_repair_map, CheckReport, DistortionCheck, FairnessCheck};
pub use config::{Budget, CellBudget, CostOverride, DistortionCosts, Epsilon, EpsilonTable, Measure, OptimizeConfig};
pub use solver::{solve_repair_map, solve_repair_map_from, SolveOutcome};

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("distortion budget c is not set; it has no default and must be chosen explicitly")]
    MissingBudget,
    #[error("invalid optimize config: {0}")]
    InvalidConfig(String),
    #[error("no feasible repair map: {constraint} (violation {violation:.3e})")]
    Infeasible { constraint: String, violation: f64 },
    #[error("row {row_id}: cell {cell} is not a source cell of the repair map")]
    UnmappedCell { row_id: u64, cell: String },
    #[error("repair map does not fit: {0}")]
    MapMismatch(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceCell {
    pub x: Vec<String>,
    pub favorable: bool,
    pub privileged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TargetCell {
    pub x: Vec<String>,
    pub favorable: bool,
}

impl std::fmt::Display for SourceCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(x=[{}], y={}, z={})", self.x.join(","), fav(self.favorable), prv(self.privileged))
    }
}

impl std::fmt::Display for TargetCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(x=[{}], y={})", self.x.join(","), fav(self.favorable))
    }
}

fn fav(b: bool) -> &'static str {
    if b {
        "favorable"
    } else {
        "unfavorable"
    }
}

fn prv(b: bool) -> &'static str {
    if b {
        "privileged"
    } else {
        "unprivileged"
    }
}

/// Row-stochastic table from source cells to target cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairMap {
    pub features: Vec<String>,
    pub source_cells: Vec<SourceCell>,
    pub target_cells: Vec<TargetCell>,
    /// Row-major, `source_cells.len() x target_cells.len()`.
    pub probabilities: Vec<f64>,
}

impl RepairMap {
    /// Targets: every tuple of the feature domain product, each with the
    /// unfavorable then the favorable label.
    pub fn target_cells_for(joint: &JointDistribution) -> Vec<TargetCell> {
        joint
            .feature_tuples()
            .into_iter()
            .flat_map(|x| [false, true].map(|favorable| TargetCell { x: x.clone(), favorable }))
            .collect()
    }

    pub fn source_cells_for(joint: &JointDistribution) -> Vec<SourceCell> {
        joint
            .cells
            .iter()
            .map(|c| SourceCell { x: c.x.clone(), favorable: c.favorable, privileged: c.privileged })
            .collect()
    }

    /// The map that leaves every cell where it is.
    pub fn identity(joint: &JointDistribution) -> Self {
        let source_cells = Self::source_cells_for(joint);
        let target_cells = Self::target_cells_for(joint);
        let mut probabilities = vec![0.0; source_cells.len() * target_cells.len()];
        for (s, src) in source_cells.iter().enumerate() {
            let t = target_cells
                .iter()
                .position(|t| t.x == src.x && t.favorable == src.favorable)
                .expect("source x lies in the domain product");
            probabilities[s * target_cells.len() + t] = 1.0;
        }
        Self { features: joint.features.clone(), source_cells, target_cells, probabilities }
    }

    pub fn n_sources(&self) -> usize {
        self.source_cells.len()
    }

    pub fn n_targets(&self) -> usize {
        self.target_cells.len()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let t = self.n_targets();
        &self.probabilities[s * t..(s + 1) * t]
    }

    pub fn source_index(&self, cell: &SourceCell) -> Option<usize> {
        self.source_cells.iter().position(|c| c == cell)
    }

    /// Largest `|row sum - 1|` and smallest entry.
    pub fn row_stats(&self) -> (f64, f64) {
        let mut worst = 0.0f64;
        let mut min_entry = f64::INFINITY;
        for s in 0..self.n_sources() {
            let row = self.row(s);
            worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
            min_entry = row.iter().copied().fold(min_entry, f64::min);
        }
        (worst, min_entry)
    }

    pub(crate) fn validate_shape(&self) -> Result<(), OptimizeError> {
        if self.probabilities.len() != self.n_sources() * self.n_targets() {
            return Err(OptimizeError::MapMismatch(format!(
                "{} probabilities for {} x {} cells",
                self.probabilities.len(),
                self.n_sources(),
                self.n_targets()
            )));
        }
        if self.probabilities.iter().any(|p| !p.is_finite()) {
            return Err(OptimizeError::MapMismatch("non-finite probability".into()));
        }
        Ok(())
    }
}
