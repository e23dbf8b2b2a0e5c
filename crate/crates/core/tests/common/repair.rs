//! Fixed binary-X/Y/Z repair instances with brute-force and LP oracles.

use repairlab::data::JointDistribution;
use repairlab::optimize::{Budget, CellBudget, DistortionCosts, Epsilon, EpsilonTable, OptimizeConfig};

use super::lp;

pub struct Instance {
    pub name: &'static str,
    pub joint: JointDistribution,
    pub config: OptimizeConfig,
}

/// Counts in the order (z, y, x) = (priv, fav, 0), (priv, fav, 1),
/// (priv, unfav, 0), (priv, unfav, 1), then the same for unprivileged.
pub fn joint(counts: [usize; 8]) -> JointDistribution {
    let mut cells = Vec::new();
    let mut i = 0;
    for z in [true, false] {
        for y in [true, false] {
            for x in ["0", "1"] {
                cells.push((vec![x.to_string()], y, z, counts[i]));
                i += 1;
            }
        }
    }
    JointDistribution::from_counts(vec!["x".into()], vec![vec!["0".into(), "1".into()]], cells)
}

fn free(cells: &[(&str, bool, bool, f64)]) -> Budget {
    Budget::PerCell {
        default: 0.0,
        cells: cells
            .iter()
            .map(|&(x, favorable, privileged, c)| CellBudget { x: vec![x.into()], favorable, privileged, c })
            .collect(),
    }
}

fn config(epsilon: Epsilon, budget: Budget) -> OptimizeConfig {
    OptimizeConfig { distortion_budget: Some(budget), epsilon, ..OptimizeConfig::new(0.0, 0.0) }
}

pub fn instances() -> Vec<Instance> {
    let mut out = Vec::new();

    // Label flips only: moving x costs more than any budget allows.
    let mut cfg = config(
        Epsilon::Uniform(0.05),
        free(&[("0", true, true, 0.3), ("0", false, false, 0.3), ("1", false, false, 0.3)]),
    );
    cfg.distortion = DistortionCosts { feature_change: 20.0, ..DistortionCosts::default() };
    out.push(Instance { name: "label_flips_only", joint: joint([30, 25, 10, 15, 10, 12, 25, 18]), config: cfg });

    // Only the unprivileged group may move.
    out.push(Instance {
        name: "one_group_moves",
        joint: joint([28, 24, 12, 16, 14, 16, 22, 18]),
        config: config(
            Epsilon::PerCell(EpsilonTable {
                favorable_privileged: 0.11,
                favorable_unprivileged: 0.07,
                unfavorable_privileged: 0.11,
                unfavorable_unprivileged: 0.07,
            }),
            free(&[("0", true, false, 0.1), ("1", true, false, 0.1), ("0", false, false, 0.1), ("1", false, false, 0.1)]),
        ),
    });

    let mut cfg = config(
        Epsilon::PerCell(EpsilonTable {
            favorable_privileged: 0.08,
            favorable_unprivileged: 0.1,
            unfavorable_privileged: 0.1,
            unfavorable_unprivileged: 0.12,
        }),
        free(&[("1", true, true, 0.2), ("0", false, false, 0.2), ("1", false, false, 0.2)]),
    );
    cfg.target_favorable_rate = Some(0.55);
    out.push(Instance { name: "asymmetric_epsilon", joint: joint([40, 10, 15, 15, 10, 15, 20, 25]), config: cfg });

    out.push(Instance {
        name: "one_unbounded_row",
        joint: joint([35, 15, 10, 20, 8, 12, 30, 20]),
        config: config(Epsilon::Uniform(0.1), free(&[("1", true, true, f64::INFINITY), ("0", false, false, 0.2)])),
    });

    let mut cfg = config(Epsilon::Uniform(0.21), free(&[("0", false, false, 0.3), ("1", false, false, 0.3)]));
    cfg.target_favorable_rate = Some(0.6);
    out.push(Instance { name: "shifted_target", joint: joint([20, 20, 5, 5, 6, 4, 30, 20]), config: cfg });

    out
}

/// Dense view of an instance, computed from the joint cells directly.
struct Dense {
    mass: Vec<f64>,
    weight: Vec<f64>,
    privileged: Vec<bool>,
    /// (x, favorable) for every target.
    targets: Vec<(String, bool)>,
    reference: Vec<f64>,
    cost: Vec<Vec<f64>>,
    budget: Vec<f64>,
    target_rate: f64,
    eps: [[f64; 2]; 2],
}

fn dense(inst: &Instance) -> Dense {
    let j = &inst.joint;
    let targets: Vec<(String, bool)> =
        ["0", "1"].iter().flat_map(|x| [false, true].map(|f| (x.to_string(), f))).collect();
    let mass: Vec<f64> = j.cells.iter().map(|c| c.count as f64 / j.total as f64).collect();
    let gm = |z: bool| j.cells.iter().filter(|c| c.privileged == z).map(|c| c.count).sum::<usize>() as f64 / j.total as f64;
    let weight = j.cells.iter().zip(&mass).map(|(c, m)| m / gm(c.privileged)).collect();
    let privileged = j.cells.iter().map(|c| c.privileged).collect();
    let mut reference = vec![0.0; targets.len()];
    for (c, m) in j.cells.iter().zip(&mass) {
        let t = targets.iter().position(|(x, f)| *x == c.x[0] && *f == c.favorable).unwrap();
        reference[t] += m;
    }
    let d = &inst.config.distortion;
    let cost = j
        .cells
        .iter()
        .map(|c| {
            targets
                .iter()
                .map(|(x, f)| {
                    (if *f != c.favorable { d.label_flip } else { 0.0 }) + if *x != c.x[0] { d.feature_change } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let budget_spec = inst.config.distortion_budget.clone().unwrap();
    let budget = j
        .cells
        .iter()
        .map(|c| match &budget_spec {
            Budget::Uniform(v) => *v,
            Budget::PerCell { default, cells } => cells
                .iter()
                .find(|b| b.x == c.x && b.favorable == c.favorable && b.privileged == c.privileged)
                .map_or(*default, |b| b.c),
        })
        .collect();
    let fav_rate = j.cells.iter().filter(|c| c.favorable).map(|c| c.count).sum::<usize>() as f64 / j.total as f64;
    let target_rate = inst.config.target_favorable_rate.unwrap_or(fav_rate);
    let mut eps = [[0.0; 2]; 2];
    for y in 0..2 {
        for z in 0..2 {
            eps[y][z] = inst.config.epsilon.get(y == 1, z == 1);
        }
    }
    Dense { mass, weight, privileged, targets, reference, cost, budget, target_rate, eps }
}

/// Distributions over `n_targets` in steps of `1 / units`.
fn compositions(units: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![units]];
    }
    let mut out = Vec::new();
    for first in 0..=units {
        for mut rest in compositions(units - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Best objective over the grid of step `1 / units` intersected with every
/// constraint, or `None` when no grid point is feasible.
pub fn grid_best(inst: &Instance, units: usize) -> Option<f64> {
    let d = dense(inst);
    let all = compositions(units, d.targets.len());
    let rows: Vec<Vec<Vec<f64>>> = (0..d.mass.len())
        .map(|s| {
            all.iter()
                .map(|k| k.iter().map(|&v| v as f64 / units as f64).collect::<Vec<f64>>())
                .filter(|p| p.iter().zip(&d.cost[s]).map(|(a, b)| a * b).sum::<f64>() <= d.budget[s] + 1e-12)
                .collect()
        })
        .collect();
    let mut best = None;
    let mut induced = vec![0.0; d.targets.len()];
    let mut fav = [0.0; 2];
    search(&d, &rows, 0, &mut induced, &mut fav, &mut best);
    best
}

fn search(d: &Dense, rows: &[Vec<Vec<f64>>], s: usize, induced: &mut Vec<f64>, fav: &mut [f64; 2], best: &mut Option<f64>) {
    if s == rows.len() {
        for z in 0..2 {
            let a = fav[z];
            if (a - d.target_rate).abs() > d.eps[1][z] + 1e-12 || ((1.0 - a) - (1.0 - d.target_rate)).abs() > d.eps[0][z] + 1e-12 {
                return;
            }
        }
        let obj = 0.5 * induced.iter().zip(&d.reference).map(|(a, b)| (a - b).abs()).sum::<f64>();
        if best.is_none_or(|b| obj < b) {
            *best = Some(obj);
        }
        return;
    }
    let z = d.privileged[s] as usize;
    for p in &rows[s] {
        let f: f64 = p.iter().zip(&d.targets).filter(|(_, t)| t.1).map(|(v, _)| v).sum();
        for (i, v) in p.iter().enumerate() {
            induced[i] += d.mass[s] * v;
        }
        fav[z] += d.weight[s] * f;
        search(d, rows, s + 1, induced, fav, best);
        fav[z] -= d.weight[s] * f;
        for (i, v) in p.iter().enumerate() {
            induced[i] -= d.mass[s] * v;
        }
    }
}

/// Exact optimum via a linear program with `|.|` split into auxiliaries.
pub fn lp_optimum(inst: &Instance) -> Option<f64> {
    let d = dense(inst);
    let (ns, nt) = (d.mass.len(), d.targets.len());
    let p = |s: usize, t: usize| s * nt + t;
    let u = |t: usize| ns * nt + t;
    let mut rows: Vec<(Vec<(usize, f64)>, f64, f64)> = Vec::new(); // (terms, slack sign, rhs)
    for s in 0..ns {
        rows.push(((0..nt).map(|t| (p(s, t), 1.0)).collect(), 0.0, 1.0));
        if d.budget[s].is_finite() {
            rows.push(((0..nt).map(|t| (p(s, t), d.cost[s][t])).collect(), 1.0, d.budget[s]));
        }
    }
    for z in 0..2 {
        let e = d.eps[1][z].min(d.eps[0][z]);
        if !e.is_finite() {
            continue;
        }
        let mut terms = Vec::new();
        for s in (0..ns).filter(|&s| d.privileged[s] as usize == z) {
            for t in (0..nt).filter(|&t| d.targets[t].1) {
                terms.push((p(s, t), d.weight[s]));
            }
        }
        rows.push((terms.clone(), 1.0, d.target_rate + e));
        rows.push((terms, -1.0, d.target_rate - e));
    }
    for t in 0..nt {
        let mut plus: Vec<(usize, f64)> = vec![(u(t), 1.0)];
        let mut minus: Vec<(usize, f64)> = vec![(u(t), 1.0)];
        for s in 0..ns {
            plus.push((p(s, t), d.mass[s]));
            minus.push((p(s, t), -d.mass[s]));
        }
        rows.push((plus, -1.0, d.reference[t]));
        rows.push((minus, -1.0, -d.reference[t]));
    }
    let n_base = ns * nt + nt;
    let n_slack = rows.iter().filter(|r| r.1 != 0.0).count();
    let n = n_base + n_slack;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut k = n_base;
    for (terms, slack, rhs) in rows {
        let mut row = vec![0.0; n];
        for (i, v) in terms {
            row[i] += v;
        }
        if slack != 0.0 {
            row[k] = slack;
            k += 1;
        }
        a.push(row);
        b.push(rhs);
    }
    let mut c = vec![0.0; n];
    for t in 0..nt {
        c[u(t)] = 0.5;
    }
    lp::minimize(&c, &a, &b).map(|(obj, _)| obj)
}
