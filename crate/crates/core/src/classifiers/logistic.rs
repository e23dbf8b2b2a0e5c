use serde::{Deserialize, Serialize};

use super::{check_classes, ClassifierError, Encoder};
use crate::data::Dataset;

/// Slack allowed before a step counts as a loss increase.
pub const LOSS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Recorded for reproducibility; weights start at zero, so training draws nothing.
    pub seed: u64,
    /// Feed the protected column to the model (disparate-treatment demos).
    pub include_protected: bool,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { learning_rate: 0.5, epochs: 300, l2: 1e-3, seed: 0, include_protected: false }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ClassifierError::InvalidConfig(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(ClassifierError::InvalidConfig(format!("l2 {} must be >= 0", self.l2)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub encoder: Encoder,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub config: LogisticConfig,
    /// Training objective after each epoch.
    pub losses: Vec<f64>,
    /// Prejudice-remover weight, 0 for the plain model.
    #[serde(default)]
    pub eta: f64,
    pub train_accuracy: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Linear scores `w . x + b`; `theta = [w..., b]`.
pub fn linear(x: &[Vec<f64>], theta: &[f64]) -> Vec<f64> {
    let (w, b) = theta.split_at(theta.len() - 1);
    x.iter().map(|r| r.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b[0]).collect()
}

/// Mean negative log-likelihood plus `l2 / 2 * |w|^2` (intercept unpenalized)
/// and its gradient.
pub fn logistic_objective(x: &[Vec<f64>], y: &[f64], theta: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let d = theta.len() - 1;
    let mut grad = vec![0.0; theta.len()];
    let mut loss = 0.0;
    for (r, (s, &t)) in x.iter().zip(linear(x, theta).into_iter().zip(y)) {
        loss += softplus(s) - t * s;
        let e = sigmoid(s) - t;
        for (g, v) in grad.iter_mut().zip(r) {
            *g += e * v;
        }
        grad[d] += e;
    }
    loss /= n;
    for g in &mut grad {
        *g /= n;
    }
    for j in 0..d {
        loss += 0.5 * l2 * theta[j] * theta[j];
        grad[j] += l2 * theta[j];
    }
    (loss, grad)
}

/// Full-batch gradient descent that never accepts a step raising the
/// objective by more than [`LOSS_SLACK`]; such steps are retried at half
/// the learning rate. Returns the final parameters and per-epoch losses.
pub(crate) fn monotone_descent(
    mut theta: Vec<f64>,
    learning_rate: f64,
    epochs: usize,
    objective: impl Fn(&[f64]) -> (f64, Vec<f64>),
) -> Result<(Vec<f64>, Vec<f64>), ClassifierError> {
    let (mut loss, mut grad) = objective(&theta);
    if !loss.is_finite() {
        return Err(ClassifierError::NonFiniteLoss { epoch: 0 });
    }
    let mut lr = learning_rate;
    let mut losses = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        loop {
            let cand: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - lr * g).collect();
            let (l, g) = objective(&cand);
            if l.is_finite() && l <= loss + LOSS_SLACK {
                theta = cand;
                loss = l;
                grad = g;
                break;
            }
            lr *= 0.5;
            if lr < 1e-30 {
                if !l.is_finite() {
                    return Err(ClassifierError::NonFiniteLoss { epoch });
                }
                break;
            }
        }
        losses.push(loss);
    }
    Ok((theta, losses))
}

pub(crate) fn targets(data: &Dataset) -> Vec<f64> {
    data.labels().into_iter().map(|y| if y { 1.0 } else { 0.0 }).collect()
}

pub fn fit_logistic(data: &Dataset, config: &LogisticConfig) -> Result<LogisticModel, ClassifierError> {
    config.validate()?;
    check_classes(data)?;
    let encoder = Encoder::fit(data, config.include_protected);
    let (x, _) = encoder.encode(data)?;
    let y = targets(data);
    let theta0 = vec![0.0; encoder.width() + 1];
    let (theta, losses) =
        monotone_descent(theta0, config.learning_rate, config.epochs, |t| logistic_objective(&x, &y, t, config.l2))?;
    Ok(LogisticModel::from_theta(encoder, theta, config.clone(), losses, 0.0, &x, &y))
}

impl LogisticModel {
    pub(crate) fn from_theta(
        encoder: Encoder,
        mut theta: Vec<f64>,
        config: LogisticConfig,
        losses: Vec<f64>,
        eta: f64,
        x: &[Vec<f64>],
        y: &[f64],
    ) -> Self {
        let correct = linear(x, &theta).iter().zip(y).filter(|(s, t)| (sigmoid(**s) >= 0.5) == (**t == 1.0)).count();
        let train_accuracy = correct as f64 / x.len().max(1) as f64;
        let intercept = theta.pop().unwrap_or(0.0);
        Self { encoder, weights: theta, intercept, config, losses, eta, train_accuracy }
    }

    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.weights.clone();
        t.push(self.intercept);
        t
    }

    pub fn score_encoded(&self, x: &[Vec<f64>]) -> Vec<f64> {
        linear(x, &self.theta()).into_iter().map(sigmoid).collect()
    }
}
