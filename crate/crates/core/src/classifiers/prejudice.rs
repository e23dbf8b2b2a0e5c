use serde::{Deserialize, Serialize};

use super::logistic::{linear, logistic_objective, monotone_descent, sigmoid, targets};
use super::{check_classes, check_groups, ClassifierError, Encoder, LogisticConfig, LogisticModel};
use crate::data::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrejudiceConfig {
    pub eta: f64,
    /// Probabilities are clamped to `[floor, 1 - floor]` inside the logarithms.
    pub clamp_floor: f64,
}

impl Default for PrejudiceConfig {
    fn default() -> Self {
        Self { eta: 1.0, clamp_floor: 1e-9 }
    }
}

fn clamp(p: f64, floor: f64) -> f64 {
    p.clamp(floor, 1.0 - floor)
}

/// Mutual information between a soft prediction and the group:
/// `sum_z P(z) [m_z ln(m_z / m) + (1 - m_z) ln((1 - m_z) / (1 - m))]`,
/// where `m_z` is the mean score in group `z` and `m` the overall mean.
pub fn prejudice_index(scores: &[f64], groups: &[bool], floor: f64) -> f64 {
    pi_parts(scores, groups, floor).0
}

/// PI, `P(z)`, clamped `m_z` and clamped `m`, indexed by `privileged as usize`.
fn pi_parts(scores: &[f64], groups: &[bool], floor: f64) -> (f64, [f64; 2], [f64; 2], f64) {
    let n = scores.len() as f64;
    let mut count = [0.0f64; 2];
    let mut sum = [0.0f64; 2];
    for (&s, &g) in scores.iter().zip(groups) {
        count[g as usize] += 1.0;
        sum[g as usize] += s;
    }
    let pz = [count[0] / n, count[1] / n];
    let m = clamp((sum[0] + sum[1]) / n, floor);
    let mz = [0, 1].map(|z| if count[z] > 0.0 { clamp(sum[z] / count[z], floor) } else { m });
    let mut pi = 0.0;
    for z in 0..2 {
        if count[z] > 0.0 {
            pi += pz[z] * (mz[z] * (mz[z] / m).ln() + (1.0 - mz[z]) * ((1.0 - mz[z]) / (1.0 - m)).ln());
        }
    }
    (pi, pz, mz, m)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Logistic objective plus `eta * PI` and its gradient. `dPI/dm_z` reduces
/// to `P(z) (logit m_z - logit m)`; the clamp is treated as the identity.
pub fn prejudice_objective(
    x: &[Vec<f64>],
    y: &[f64],
    groups: &[bool],
    theta: &[f64],
    l2: f64,
    eta: f64,
    floor: f64,
) -> (f64, Vec<f64>) {
    let (mut loss, mut grad) = logistic_objective(x, y, theta, l2);
    if eta == 0.0 {
        return (loss, grad);
    }
    let scores: Vec<f64> = linear(x, theta).into_iter().map(sigmoid).collect();
    let (pi, pz, mz, m) = pi_parts(&scores, groups, floor);
    let mut count = [0.0f64; 2];
    for &g in groups {
        count[g as usize] += 1.0;
    }
    let coef = [0, 1].map(|z| if count[z] > 0.0 { eta * pz[z] * (logit(mz[z]) - logit(m)) / count[z] } else { 0.0 });
    let d = theta.len() - 1;
    for ((r, &s), &g) in x.iter().zip(&scores).zip(groups) {
        let c = coef[g as usize] * s * (1.0 - s);
        for (gr, v) in grad.iter_mut().zip(r) {
            *gr += c * v;
        }
        grad[d] += c;
    }
    loss += eta * pi;
    (loss, grad)
}

/// Logistic regression penalized by `eta` times the prejudice index. The
/// protected column feeds the penalty only, never the features.
pub fn fit_prejudice_remover(
    data: &Dataset,
    prejudice: &PrejudiceConfig,
    config: &LogisticConfig,
) -> Result<LogisticModel, ClassifierError> {
    config.validate()?;
    if !(prejudice.eta >= 0.0 && prejudice.eta.is_finite()) {
        return Err(ClassifierError::InvalidConfig(format!("eta {} must be finite and >= 0", prejudice.eta)));
    }
    if !(prejudice.clamp_floor > 0.0 && prejudice.clamp_floor < 0.5) {
        return Err(ClassifierError::InvalidConfig(format!("clamp_floor {} must be in (0, 0.5)", prejudice.clamp_floor)));
    }
    check_classes(data)?;
    if prejudice.eta > 0.0 {
        check_groups(data)?;
    }
    let features = LogisticConfig { include_protected: false, ..config.clone() };
    let encoder = Encoder::fit(data, false);
    let (x, _) = encoder.encode(data)?;
    let y = targets(data);
    let groups = data.groups();
    let theta0 = vec![0.0; encoder.width() + 1];
    let (theta, losses) = monotone_descent(theta0, config.learning_rate, config.epochs, |t| {
        prejudice_objective(&x, &y, &groups, t, config.l2, prejudice.eta, prejudice.clamp_floor)
    })?;
    Ok(LogisticModel::from_theta(encoder, theta, features, losses, prejudice.eta, &x, &y))
}
