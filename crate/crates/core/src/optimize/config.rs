use serde::{Deserialize, Serialize};

use super::{OptimizeError, SourceCell};

/// Distance used for both the objective and the parity constraint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    #[default]
    TotalVariation,
}

/// Parity tolerance per `(y, z)`; `inf` disables a constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonTable {
    #[serde(with = "crate::serde_float")]
    pub favorable_privileged: f64,
    #[serde(with = "crate::serde_float")]
    pub favorable_unprivileged: f64,
    #[serde(with = "crate::serde_float")]
    pub unfavorable_privileged: f64,
    #[serde(with = "crate::serde_float")]
    pub unfavorable_unprivileged: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    Uniform(#[serde(with = "crate::serde_float")] f64),
    PerCell(EpsilonTable),
}

impl Epsilon {
    pub fn get(&self, favorable: bool, privileged: bool) -> f64 {
        match self {
            Epsilon::Uniform(e) => *e,
            Epsilon::PerCell(t) => match (favorable, privileged) {
                (true, true) => t.favorable_privileged,
                (true, false) => t.favorable_unprivileged,
                (false, true) => t.unfavorable_privileged,
                (false, false) => t.unfavorable_unprivileged,
            },
        }
    }

    fn values(&self) -> [f64; 4] {
        [self.get(true, true), self.get(true, false), self.get(false, true), self.get(false, false)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellBudget {
    pub x: Vec<String>,
    pub favorable: bool,
    pub privileged: bool,
    #[serde(with = "crate::serde_float")]
    pub c: f64,
}

/// Distortion budget `c`: one broadcast value, optionally overridden per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Budget {
    Uniform(#[serde(with = "crate::serde_float")] f64),
    PerCell {
        #[serde(with = "crate::serde_float")]
        default: f64,
        cells: Vec<CellBudget>,
    },
}

impl Budget {
    pub fn for_cell(&self, cell: &SourceCell) -> f64 {
        match self {
            Budget::Uniform(c) => *c,
            Budget::PerCell { default, cells } => cells
                .iter()
                .find(|b| b.x == cell.x && b.favorable == cell.favorable && b.privileged == cell.privileged)
                .map_or(*default, |b| b.c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostOverride {
    pub from_x: Vec<String>,
    pub from_favorable: bool,
    pub to_x: Vec<String>,
    pub to_favorable: bool,
    pub cost: f64,
}

/// Per-move cost `delta((x, y), (x̃, ỹ))`. Default: `label_flip` for a label
/// change plus `feature_change` per changed coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionCosts {
    #[serde(default = "one")]
    pub label_flip: f64,
    #[serde(default = "one")]
    pub feature_change: f64,
    #[serde(default)]
    pub overrides: Vec<CostOverride>,
}

fn one() -> f64 {
    1.0
}

impl Default for DistortionCosts {
    fn default() -> Self {
        Self { label_flip: 1.0, feature_change: 1.0, overrides: Vec::new() }
    }
}

impl DistortionCosts {
    pub fn cost(&self, from_x: &[String], from_favorable: bool, to_x: &[String], to_favorable: bool) -> f64 {
        if let Some(o) = self
            .overrides
            .iter()
            .find(|o| o.from_x == from_x && o.from_favorable == from_favorable && o.to_x == to_x && o.to_favorable == to_favorable)
        {
            return o.cost;
        }
        let changed = from_x.iter().zip(to_x).filter(|(a, b)| a != b).count();
        let flip = if from_favorable != to_favorable { self.label_flip } else { 0.0 };
        flip + self.feature_change * changed as f64
    }
}

fn default_tolerance() -> f64 {
    1e-6
}

fn default_max_iterations() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(default)]
    pub measure: Measure,
    pub epsilon: Epsilon,
    /// No default: a missing budget is an error.
    #[serde(default)]
    pub distortion_budget: Option<Budget>,
    #[serde(default)]
    pub distortion: DistortionCosts,
    /// `p_T(favorable)`; the empirical favorable rate when unset.
    #[serde(default)]
    pub target_favorable_rate: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Seed for sampling the repaired dataset; the solver itself draws nothing.
    #[serde(default)]
    pub seed: u64,
}

impl OptimizeConfig {
    pub fn new(epsilon: f64, budget: f64) -> Self {
        Self {
            measure: Measure::TotalVariation,
            epsilon: Epsilon::Uniform(epsilon),
            distortion_budget: Some(Budget::Uniform(budget)),
            distortion: DistortionCosts::default(),
            target_favorable_rate: None,
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            seed: 0,
        }
    }

    pub fn budget(&self) -> Result<&Budget, OptimizeError> {
        self.distortion_budget.as_ref().ok_or(OptimizeError::MissingBudget)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |m: String| Err(OptimizeError::InvalidConfig(m));
        for e in self.epsilon.values() {
            if e.is_nan() || e < 0.0 {
                return bad(format!("epsilon {e} must be >= 0"));
            }
        }
        match self.budget()? {
            Budget::Uniform(c) => {
                if c.is_nan() || *c < 0.0 {
                    return bad(format!("distortion budget {c} must be >= 0"));
                }
            }
            Budget::PerCell { default, cells } => {
                for c in std::iter::once(*default).chain(cells.iter().map(|b| b.c)) {
                    if c.is_nan() || c < 0.0 {
                        return bad(format!("distortion budget {c} must be >= 0"));
                    }
                }
            }
        }
        let d = &self.distortion;
        for v in [d.label_flip, d.feature_change] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("distortion cost {v} must be finite and >= 0"));
            }
        }
        for o in &d.overrides {
            if !o.cost.is_finite() || o.cost < 0.0 {
                return bad(format!("distortion cost {} must be finite and >= 0", o.cost));
            }
            if o.from_x == o.to_x && o.from_favorable == o.to_favorable && o.cost != 0.0 {
                return bad("a cell's cost to itself must be 0".into());
            }
        }
        if let Some(p) = self.target_favorable_rate {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("target_favorable_rate {p} is not in [0, 1]"));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance {} must be positive", self.tolerance));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        Ok(())
    }
}
