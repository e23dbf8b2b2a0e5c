//! Two-head network with a shared tanh layer: head A predicts the label,
//! head B (the adversary) predicts the protected group from the same
//! hidden units.
//!
//! Each epoch runs `adversary_steps` gradient steps on B's own NLL, then
//! one main step on the shared layer and A minimizing
//! `NLL_A - lambda * NLL_B`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::logistic::{sigmoid, softplus, targets};
use super::{check_classes, check_groups, ClassifierError, Encoder};
use crate::data::Dataset;
use crate::rng::{keyed_rng, streams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdversarialConfig {
    pub hidden: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub adversary_learning_rate: f64,
    pub adversary_steps: usize,
    /// Initial weights are uniform on `[-init_scale, init_scale] / sqrt(fan_in)`.
    pub init_scale: f64,
    pub seed: u64,
    pub include_protected: bool,
}

impl Default for AdversarialConfig {
    fn default() -> Self {
        Self {
            hidden: 8,
            lambda: 1.0,
            epochs: 500,
            learning_rate: 0.5,
            adversary_learning_rate: 0.5,
            adversary_steps: 1,
            init_scale: 0.5,
            seed: 0,
            include_protected: false,
        }
    }
}

/// Shared-layer and head parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub hidden: usize,
    pub inputs: usize,
    /// `hidden x inputs`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub wa: Vec<f64>,
    pub ba: f64,
    pub wb: Vec<f64>,
    pub bb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub nll_predictor: f64,
    pub nll_adversary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialModel {
    pub encoder: Encoder,
    pub network: Network,
    pub config: AdversarialConfig,
    pub history: Vec<EpochStats>,
    pub train_accuracy: f64,
    /// Share of training rows where `(B >= 0.5) == privileged`.
    pub adversary_accuracy: f64,
}

struct Forward {
    h: Vec<Vec<f64>>,
    sa: Vec<f64>,
    sb: Vec<f64>,
}

impl Network {
    pub fn init(inputs: usize, hidden: usize, scale: f64, seed: u64) -> Self {
        let mut rng = keyed_rng(seed, streams::INIT, 0);
        let mut draw = |fan_in: usize, n: usize| -> Vec<f64> {
            let s = scale / (fan_in.max(1) as f64).sqrt();
            (0..n).map(|_| rng.gen_range(-s..=s)).collect()
        };
        let w1 = draw(inputs, hidden * inputs);
        let wa = draw(hidden, hidden);
        let wb = draw(hidden, hidden);
        Self { hidden, inputs, w1, b1: vec![0.0; hidden], wa, ba: 0.0, wb, bb: 0.0 }
    }

    fn forward(&self, x: &[Vec<f64>]) -> Forward {
        let mut h = Vec::with_capacity(x.len());
        let mut sa = Vec::with_capacity(x.len());
        let mut sb = Vec::with_capacity(x.len());
        for r in x {
            let hid: Vec<f64> = (0..self.hidden)
                .map(|j| {
                    let w = &self.w1[j * self.inputs..(j + 1) * self.inputs];
                    (w.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() + self.b1[j]).tanh()
                })
                .collect();
            sa.push(hid.iter().zip(&self.wa).map(|(a, b)| a * b).sum::<f64>() + self.ba);
            sb.push(hid.iter().zip(&self.wb).map(|(a, b)| a * b).sum::<f64>() + self.bb);
            h.push(hid);
        }
        Forward { h, sa, sb }
    }

    pub fn predictor_scores(&self, x: &[Vec<f64>]) -> Vec<f64> {
        self.forward(x).sa.into_iter().map(sigmoid).collect()
    }

    pub fn adversary_scores(&self, x: &[Vec<f64>]) -> Vec<f64> {
        self.forward(x).sb.into_iter().map(sigmoid).collect()
    }

    /// Main-step parameters `[w1, b1, wa, ba]`.
    pub fn main_params(&self) -> Vec<f64> {
        let mut v = self.w1.clone();
        v.extend(&self.b1);
        v.extend(&self.wa);
        v.push(self.ba);
        v
    }

    pub fn set_main_params(&mut self, v: &[f64]) {
        let (n1, h) = (self.w1.len(), self.hidden);
        self.w1.copy_from_slice(&v[..n1]);
        self.b1.copy_from_slice(&v[n1..n1 + h]);
        self.wa.copy_from_slice(&v[n1 + h..n1 + 2 * h]);
        self.ba = v[n1 + 2 * h];
    }

    /// `(NLL_A, NLL_B)` on the given rows.
    pub fn losses(&self, x: &[Vec<f64>], y: &[f64], z: &[f64]) -> (f64, f64) {
        let f = self.forward(x);
        let n = x.len() as f64;
        let a = f.sa.iter().zip(y).map(|(s, t)| softplus(*s) - t * s).sum::<f64>() / n;
        let b = f.sb.iter().zip(z).map(|(s, t)| softplus(*s) - t * s).sum::<f64>() / n;
        (a, b)
    }

    /// `NLL_A - lambda * NLL_B` and its gradient in main-step layout.
    pub fn main_objective(&self, x: &[Vec<f64>], y: &[f64], z: &[f64], lambda: f64) -> (f64, Vec<f64>) {
        let f = self.forward(x);
        let n = x.len() as f64;
        let (h, d) = (self.hidden, self.inputs);
        let mut g = vec![0.0; h * d + 2 * h + 1];
        let mut obj = 0.0;
        for i in 0..x.len() {
            obj += softplus(f.sa[i]) - y[i] * f.sa[i] - lambda * (softplus(f.sb[i]) - z[i] * f.sb[i]);
            let ea = sigmoid(f.sa[i]) - y[i];
            let eb = sigmoid(f.sb[i]) - z[i];
            for j in 0..h {
                let hj = f.h[i][j];
                g[h * d + h + j] += ea * hj;
                let dpre = (ea * self.wa[j] - lambda * eb * self.wb[j]) * (1.0 - hj * hj);
                for k in 0..d {
                    g[j * d + k] += dpre * x[i][k];
                }
                g[h * d + j] += dpre;
            }
            g[h * d + 2 * h] += ea;
        }
        for v in &mut g {
            *v /= n;
        }
        (obj / n, g)
    }

    /// `NLL_B` gradient with respect to `[wb, bb]`.
    fn adversary_gradient(&self, x: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
        let f = self.forward(x);
        let n = x.len() as f64;
        let mut g = vec![0.0; self.hidden + 1];
        for i in 0..x.len() {
            let eb = sigmoid(f.sb[i]) - z[i];
            for j in 0..self.hidden {
                g[j] += eb * f.h[i][j];
            }
            g[self.hidden] += eb;
        }
        g.iter().map(|v| v / n).collect()
    }
}

pub fn fit_adversarial(data: &Dataset, config: &AdversarialConfig) -> Result<AdversarialModel, ClassifierError> {
    if config.hidden == 0 {
        return Err(ClassifierError::InvalidConfig("hidden width must be positive".into()));
    }
    if !(config.lambda >= 0.0 && config.lambda.is_finite()) {
        return Err(ClassifierError::InvalidConfig(format!("lambda {} must be finite and >= 0", config.lambda)));
    }
    for lr in [config.learning_rate, config.adversary_learning_rate] {
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(ClassifierError::InvalidConfig(format!("learning rate {lr} must be finite and >= 0")));
        }
    }
    check_classes(data)?;
    check_groups(data)?;
    let encoder = Encoder::fit(data, config.include_protected);
    let (x, _) = encoder.encode(data)?;
    let y = targets(data);
    let z: Vec<f64> = data.groups().into_iter().map(|g| if g { 1.0 } else { 0.0 }).collect();
    let mut net = Network::init(encoder.width(), config.hidden, config.init_scale, config.seed);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        for _ in 0..config.adversary_steps {
            let g = net.adversary_gradient(&x, &z);
            for j in 0..net.hidden {
                net.wb[j] -= config.adversary_learning_rate * g[j];
            }
            net.bb -= config.adversary_learning_rate * g[net.hidden];
        }
        let (_, g) = net.main_objective(&x, &y, &z, config.lambda);
        let p: Vec<f64> = net.main_params().iter().zip(&g).map(|(p, g)| p - config.learning_rate * g).collect();
        net.set_main_params(&p);
        let (a, b) = net.losses(&x, &y, &z);
        if !a.is_finite() || !b.is_finite() {
            return Err(ClassifierError::NonFiniteLoss { epoch });
        }
        history.push(EpochStats { nll_predictor: a, nll_adversary: b });
    }
    let hit = |scores: Vec<f64>, truth: &[f64]| {
        scores.iter().zip(truth).filter(|(s, t)| (**s >= 0.5) == (**t == 1.0)).count() as f64 / truth.len() as f64
    };
    let train_accuracy = hit(net.predictor_scores(&x), &y);
    let adversary_accuracy = hit(net.adversary_scores(&x), &z);
    Ok(AdversarialModel { encoder, network: net, config: config.clone(), history, train_accuracy, adversary_accuracy })
}
