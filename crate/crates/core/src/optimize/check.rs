//! Independent certification of a repair map.
//!
//! Recomputes every constraint directly from the joint table and the map,
//! without going through the solver's dense problem form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{OptimizeConfig, OptimizeError, RepairMap, SourceCell, TargetCell};
use crate::data::JointDistribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessCheck {
    pub favorable: bool,
    pub privileged: bool,
    /// `P(Ỹ = y | Z = z)` under the map.
    pub value: f64,
    pub target: f64,
    #[serde(with = "crate::serde_float")]
    pub epsilon: f64,
    /// `|value - target| - epsilon`; positive means violated.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionCheck {
    pub cell: SourceCell,
    pub expected_cost: f64,
    #[serde(with = "crate::serde_float")]
    pub budget: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub max_row_sum_error: f64,
    pub min_entry: f64,
    pub fairness: Vec<FairnessCheck>,
    pub distortion: Vec<DistortionCheck>,
    pub objective: f64,
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Row sums within `1e-9`; parity and distortion constraints within `tol`.
pub fn check_repair_map(
    joint: &JointDistribution,
    config: &OptimizeConfig,
    map: &RepairMap,
    tol: f64,
) -> Result<CheckReport, OptimizeError> {
    map.validate_shape()?;
    let budget = config.budget()?;
    let mut violations = Vec::new();

    let (max_row_sum_error, min_entry) = map.row_stats();
    if max_row_sum_error > 1e-9 {
        violations.push(format!("a row sums to 1 {max_row_sum_error:+.3e}"));
    }
    if min_entry < 0.0 {
        violations.push(format!("negative entry {min_entry:.3e}"));
    }

    let sources: HashMap<&SourceCell, usize> = map.source_cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let target_rate = config.target_favorable_rate.unwrap_or_else(|| joint.favorable_rate());

    let mut group_mass = [0.0f64; 2];
    let mut group_favorable = [0.0f64; 2];
    let mut induced: HashMap<&TargetCell, f64> = HashMap::new();
    let mut empirical: HashMap<TargetCell, f64> = HashMap::new();
    let mut distortion = Vec::new();
    for cell in &joint.cells {
        let key = SourceCell { x: cell.x.clone(), favorable: cell.favorable, privileged: cell.privileged };
        let &s = sources
            .get(&key)
            .ok_or_else(|| OptimizeError::MapMismatch(format!("joint cell {key} has no row in the map")))?;
        let row = map.row(s);
        let z = cell.privileged as usize;
        group_mass[z] += cell.mass;
        let mut expected_cost = 0.0;
        for (t, &prob) in map.target_cells.iter().zip(row) {
            if t.favorable {
                group_favorable[z] += cell.mass * prob;
            }
            *induced.entry(t).or_default() += cell.mass * prob;
            expected_cost += prob * config.distortion.cost(&cell.x, cell.favorable, &t.x, t.favorable);
        }
        *empirical.entry(TargetCell { x: cell.x.clone(), favorable: cell.favorable }).or_default() += cell.mass;
        let c = budget.for_cell(&key);
        let excess = expected_cost - c;
        if excess > tol {
            violations.push(format!("cell {key}: expected distortion {expected_cost:.9} exceeds budget {c}"));
        }
        distortion.push(DistortionCheck { cell: key, expected_cost, budget: c, excess });
    }

    let mut fairness = Vec::new();
    for privileged in [true, false] {
        let z = privileged as usize;
        let fav_rate = group_favorable[z] / group_mass[z];
        for favorable in [true, false] {
            let (value, target) = if favorable { (fav_rate, target_rate) } else { (1.0 - fav_rate, 1.0 - target_rate) };
            let epsilon = config.epsilon.get(favorable, privileged);
            let excess = (value - target).abs() - epsilon;
            if excess > tol {
                violations.push(format!(
                    "P(y={} | z={}) = {value:.9} is {:.3e} outside target {target:.9} +/- {epsilon}",
                    if favorable { "favorable" } else { "unfavorable" },
                    if privileged { "privileged" } else { "unprivileged" },
                    excess
                ));
            }
            fairness.push(FairnessCheck { favorable, privileged, value, target, epsilon, excess });
        }
    }

    let mut objective = 0.0;
    for t in &map.target_cells {
        let a = induced.get(t).copied().unwrap_or(0.0);
        let b = empirical.get(t).copied().unwrap_or(0.0);
        objective += (a - b).abs();
    }
    for (t, b) in &empirical {
        if !map.target_cells.contains(t) {
            objective += b;
        }
    }
    objective *= 0.5;

    Ok(CheckReport { max_row_sum_error, min_entry, fairness, distortion, objective, violations })
}
