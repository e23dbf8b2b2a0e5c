//! Dense numeric form of the repair problem.

use super::{OptimizeConfig, OptimizeError, RepairMap, SourceCell, TargetCell};
use crate::data::JointDistribution;

pub(crate) struct Problem {
    pub sources: Vec<SourceCell>,
    pub targets: Vec<TargetCell>,
    /// Source mass `p(x, y, z)`.
    pub mass: Vec<f64>,
    /// `p(x, y | z)` for the source's own group.
    pub weight: Vec<f64>,
    pub privileged: Vec<bool>,
    /// Empirical `p(x, y)` over target cells.
    pub reference: Vec<f64>,
    pub favorable: Vec<bool>,
    /// `cost[s][t]`.
    pub cost: Vec<Vec<f64>>,
    pub budget: Vec<f64>,
    /// `[lo, hi]` on `P(Ỹ = favorable | z)`, indexed by `privileged as usize`.
    pub bounds: [(f64, f64); 2],
    pub target_rate: f64,
    pub epsilon: [f64; 2],
}

impl Problem {
    pub fn build(joint: &JointDistribution, config: &OptimizeConfig) -> Result<Self, OptimizeError> {
        config.validate()?;
        if joint.cells.is_empty() {
            return Err(OptimizeError::InvalidConfig("joint distribution has no cells".into()));
        }
        for z in [false, true] {
            if joint.group_mass(z) <= 0.0 {
                let name = if z { "privileged" } else { "unprivileged" };
                return Err(OptimizeError::InvalidConfig(format!("{name} group has no mass")));
            }
        }
        let budget_spec = config.budget()?;
        let sources = RepairMap::source_cells_for(joint);
        let targets = RepairMap::target_cells_for(joint);
        let mass: Vec<f64> = joint.cells.iter().map(|c| c.mass).collect();
        let group_mass = [joint.group_mass(false), joint.group_mass(true)];
        let weight = joint.cells.iter().map(|c| c.mass / group_mass[c.privileged as usize]).collect();
        let privileged = joint.cells.iter().map(|c| c.privileged).collect();
        let mut reference = vec![0.0; targets.len()];
        for c in &joint.cells {
            let t = targets
                .iter()
                .position(|t| t.x == c.x && t.favorable == c.favorable)
                .expect("cell x lies in the domain product");
            reference[t] += c.mass;
        }
        let favorable = targets.iter().map(|t| t.favorable).collect();
        let cost = sources
            .iter()
            .map(|s| targets.iter().map(|t| config.distortion.cost(&s.x, s.favorable, &t.x, t.favorable)).collect())
            .collect();
        let budget = sources.iter().map(|s| budget_spec.for_cell(s)).collect();
        let target_rate = config.target_favorable_rate.unwrap_or_else(|| joint.favorable_rate());
        let mut bounds = [(0.0, 0.0); 2];
        let mut epsilon = [0.0; 2];
        for z in [false, true] {
            // |a - p| <= eps(1, z) and |(1 - a) - (1 - p)| <= eps(0, z) bound the same quantity.
            let e = config.epsilon.get(true, z).min(config.epsilon.get(false, z));
            epsilon[z as usize] = e;
            bounds[z as usize] = (target_rate - e, target_rate + e);
        }
        Ok(Self { sources, targets, mass, weight, privileged, reference, favorable, cost, budget, bounds, target_rate, epsilon })
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn identity(&self) -> Vec<Vec<f64>> {
        self.sources
            .iter()
            .map(|s| self.targets.iter().map(|t| if t.x == s.x && t.favorable == s.favorable { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    pub fn induced(&self, p: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_targets()];
        for (row, m) in p.iter().zip(&self.mass) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += m * v;
            }
        }
        out
    }

    /// Total variation between the induced and reference `(X, Y)` tables.
    pub fn objective(&self, p: &[Vec<f64>]) -> f64 {
        0.5 * self.induced(p).iter().zip(&self.reference).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// `P(Ỹ = favorable | z)` for `z = unprivileged, privileged`.
    pub fn group_rates(&self, p: &[Vec<f64>]) -> [f64; 2] {
        let mut rates = [0.0; 2];
        for (s, row) in p.iter().enumerate() {
            let fav: f64 = row.iter().zip(&self.favorable).filter(|(_, f)| **f).map(|(v, _)| v).sum();
            rates[self.privileged[s] as usize] += self.weight[s] * fav;
        }
        rates
    }

    /// Signed excess over each group's band: `> 0` above, `< 0` below, `0` inside.
    pub fn excess(&self, p: &[Vec<f64>]) -> [f64; 2] {
        let rates = self.group_rates(p);
        [0, 1].map(|z| {
            let (lo, hi) = self.bounds[z];
            if rates[z] > hi {
                rates[z] - hi
            } else if rates[z] < lo {
                rates[z] - lo
            } else {
                0.0
            }
        })
    }

    pub fn violation(&self, p: &[Vec<f64>]) -> f64 {
        self.excess(p).iter().map(|e| e.abs()).sum()
    }

    pub fn project_row(&self, s: usize, row: &[f64]) -> Vec<f64> {
        super::simplex::project_capped_simplex(row, &self.cost[s], self.budget[s])
    }

    /// Exact projection onto both parity slabs (they touch disjoint rows).
    pub fn project_slabs(&self, p: &mut [Vec<f64>]) {
        let n_fav = self.favorable.iter().filter(|f| **f).count() as f64;
        let excess = self.excess(p);
        for z in 0..2 {
            if excess[z] == 0.0 {
                continue;
            }
            let norm2: f64 = (0..self.n_sources())
                .filter(|&s| self.privileged[s] as usize == z)
                .map(|s| self.weight[s] * self.weight[s] * n_fav)
                .sum();
            let scale = excess[z] / norm2;
            for s in (0..self.n_sources()).filter(|&s| self.privileged[s] as usize == z) {
                for (v, f) in p[s].iter_mut().zip(&self.favorable) {
                    if *f {
                        *v -= scale * self.weight[s];
                    }
                }
            }
        }
    }

    pub fn describe_worst(&self, p: &[Vec<f64>]) -> (String, f64) {
        let rates = self.group_rates(p);
        let excess = self.excess(p);
        let z = if excess[1].abs() >= excess[0].abs() { 1 } else { 0 };
        let name = if z == 1 { "privileged" } else { "unprivileged" };
        let (lo, hi) = self.bounds[z];
        (
            format!(
                "P(favorable | {name}) = {:.6} cannot reach [{lo:.6}, {hi:.6}] (target {:.6}, epsilon {}) within the distortion budget",
                rates[z], self.target_rate, self.epsilon[z]
            ),
            excess[z].abs(),
        )
    }
}
