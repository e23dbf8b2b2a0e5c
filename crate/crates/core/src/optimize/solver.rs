//! Projected subgradient solver.
//!
//! Every iterate lives in the product of per-row feasible sets (simplex cut
//! by the row's distortion budget), kept exact by Euclidean projection. The
//! parity slabs are handled by an exact penalty during descent and restored
//! afterwards by alternating projections.

use serde::{Deserialize, Serialize};

use super::problem::Problem;
use super::{OptimizeConfig, OptimizeError, RepairMap};
use crate::data::JointDistribution;

/// Penalty weight on parity violation. A unit of violation in group `z`
/// needs `p(z)` of probability mass moved, and moving mass changes the
/// objective by at most that much, so any weight above 1 is exact.
const PENALTY: f64 = 4.0;

const MAX_RESTORE_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub map: RepairMap,
    /// Total variation between repaired and empirical `(X, Y)`.
    pub objective: f64,
    /// Largest parity-constraint violation of the returned map.
    pub max_violation: f64,
    /// False when the best iterate was still improving at the end.
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

pub fn solve_repair_map(joint: &JointDistribution, config: &OptimizeConfig) -> Result<SolveOutcome, OptimizeError> {
    solve_repair_map_from(joint, config, None)
}

/// Like [`solve_repair_map`] but starting from `warm` (projected onto the
/// row constraints first) instead of the identity map.
pub fn solve_repair_map_from(
    joint: &JointDistribution,
    config: &OptimizeConfig,
    warm: Option<&RepairMap>,
) -> Result<SolveOutcome, OptimizeError> {
    let prob = Problem::build(joint, config)?;
    let feas_tol = config.tolerance * 1e-3;
    let mut p = match warm {
        Some(map) => warm_rows(&prob, map)?,
        None => prob.identity(),
    };
    project_rows(&prob, &mut p);
    let mut iterations = 0;

    if prob.violation(&p) > feas_tol {
        let n = (config.max_iterations / 4).max(1);
        let run = descend(&prob, p, n, 0.5, 1e-8, 0.0, Some(feas_tol));
        iterations += run.iterations;
        p = run.best;
    }
    let (feasible, used) = restore(&prob, p, feas_tol);
    iterations += used;
    if prob.violation(&feasible) > feas_tol {
        let (constraint, violation) = prob.describe_worst(&feasible);
        return Err(OptimizeError::Infeasible { constraint, violation });
    }

    let remaining = config.max_iterations.saturating_sub(iterations).max(2);
    let first = remaining * 3 / 5;
    let coarse = descend(&prob, feasible.clone(), first, 0.5, 1e-6, PENALTY, None);
    let fine = descend(&prob, coarse.best, remaining - first, 1e-3, 1e-10, PENALTY, None);
    iterations += coarse.iterations + fine.iterations;
    let converged = fine.late_gain <= config.tolerance;

    let (polished, used) = restore(&prob, fine.best, feas_tol);
    iterations += used;
    let mut warnings = Vec::new();
    let best = if prob.violation(&polished) <= feas_tol && prob.objective(&polished) <= prob.objective(&feasible) {
        polished
    } else {
        feasible
    };
    if !converged {
        warnings.push(format!(
            "repair solver did not settle within {} iterations (late improvement {:.3e}); returning best feasible iterate",
            config.max_iterations, fine.late_gain
        ));
    }
    let objective = prob.objective(&best);
    let max_violation = prob.excess(&best).iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let map = RepairMap {
        features: joint.features.clone(),
        source_cells: prob.sources.clone(),
        target_cells: prob.targets.clone(),
        probabilities: best.into_iter().flatten().collect(),
    };
    Ok(SolveOutcome { map, objective, max_violation, converged, iterations, warnings })
}

fn warm_rows(prob: &Problem, map: &RepairMap) -> Result<Vec<Vec<f64>>, OptimizeError> {
    map.validate_shape()?;
    if map.source_cells != prob.sources || map.target_cells != prob.targets {
        return Err(OptimizeError::MapMismatch("warm start cells differ from the joint distribution's".into()));
    }
    Ok((0..map.n_sources()).map(|s| map.row(s).to_vec()).collect())
}

fn project_rows(prob: &Problem, p: &mut [Vec<f64>]) {
    for (s, row) in p.iter_mut().enumerate() {
        *row = prob.project_row(s, row);
        debug_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9 && row.iter().all(|v| *v >= 0.0));
    }
}

/// Alternating projections between the row sets and the parity slabs.
fn restore(prob: &Problem, mut p: Vec<Vec<f64>>, feas_tol: f64) -> (Vec<Vec<f64>>, usize) {
    for i in 0..MAX_RESTORE_ITERATIONS {
        if prob.violation(&p) <= feas_tol {
            return (p, i);
        }
        prob.project_slabs(&mut p);
        project_rows(prob, &mut p);
    }
    (p, MAX_RESTORE_ITERATIONS)
}

struct Run {
    best: Vec<Vec<f64>>,
    iterations: usize,
    /// Improvement of the best value over the last tenth of the run.
    late_gain: f64,
}

/// Normalized projected subgradient on `objective_weight * f + V` where
/// `V` is parity violation, with geometrically decaying steps. A zero
/// `objective_weight` gives the pure feasibility problem.
fn descend(
    prob: &Problem,
    mut p: Vec<Vec<f64>>,
    n: usize,
    step0: f64,
    step_end: f64,
    penalty: f64,
    stop_below: Option<f64>,
) -> Run {
    let feasibility_only = penalty == 0.0;
    let value = |p: &[Vec<f64>]| {
        if feasibility_only {
            prob.violation(p)
        } else {
            prob.objective(p) + penalty * prob.violation(p)
        }
    };
    let decay = if n > 1 { (step_end / step0).powf(1.0 / (n - 1) as f64) } else { 1.0 };
    let mut step = step0;
    let mut best = p.clone();
    let mut best_value = value(&p);
    let mark = n - n / 10;
    let mut value_at_mark = best_value;
    let mut g = vec![vec![0.0; prob.n_targets()]; prob.n_sources()];
    for k in 0..n {
        if k == mark {
            value_at_mark = best_value;
        }
        if stop_below.is_some_and(|t| best_value <= t) {
            return Run { best, iterations: k, late_gain: 0.0 };
        }
        let excess = prob.excess(&p);
        let signs: Vec<f64> = if feasibility_only {
            Vec::new()
        } else {
            prob.induced(&p).iter().zip(&prob.reference).map(|(a, b)| sign(a - b)).collect()
        };
        let mut norm2 = 0.0;
        for s in 0..prob.n_sources() {
            let z = prob.privileged[s] as usize;
            let pen = if feasibility_only { 1.0 } else { penalty } * sign(excess[z]) * prob.weight[s];
            for t in 0..prob.n_targets() {
                let mut v = if prob.favorable[t] { pen } else { 0.0 };
                if !feasibility_only {
                    v += 0.5 * prob.mass[s] * signs[t];
                }
                g[s][t] = v;
                norm2 += v * v;
            }
        }
        if norm2 == 0.0 {
            return Run { best, iterations: k, late_gain: 0.0 };
        }
        let scale = step / norm2.sqrt();
        for (row, grow) in p.iter_mut().zip(&g) {
            for (v, gv) in row.iter_mut().zip(grow) {
                *v -= scale * gv;
            }
        }
        project_rows(prob, &mut p);
        let v = value(&p);
        if v < best_value {
            best_value = v;
            best.clone_from(&p);
        }
        step *= decay;
    }
    Run { best, iterations: n, late_gain: value_at_mark - best_value }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
