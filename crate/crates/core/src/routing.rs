//! Consent-gated AI decisions with blind human re-evaluation.
//!
//! Each matter consents to an AI decision with probability `consent_rate`.
//! At most `floor(f * n)` consenting matters are decided by the model; a
//! favorable AI decision is final, an unfavorable one is re-inserted at a
//! uniformly random position of the human queue. Human queue records carry
//! only the case fields, so a re-inserted matter looks exactly like one that
//! never saw the model. Consenting matters beyond the cap go to the human
//! queue as ordinary matters.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{ClassifierError, Model};
use crate::data::Dataset;
use crate::metrics::GroupPair;
use crate::rng::{keyed_rng, streams};

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("invalid routing config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    EncodingMismatch(#[from] ClassifierError),
    #[error("expected {expected} scores, got {found}")]
    ScoreLength { expected: usize, found: usize },
}

/// Which consenting matters the AI takes when consent exceeds the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    #[default]
    ArrivalOrder,
    Random,
    HighestScore,
}

/// Simulated human decider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HumanModel {
    /// Favorable with a fixed probability per group.
    GroupRates { privileged: f64, unprivileged: f64 },
    /// Reproduces the recorded label with probability `agreement`, else
    /// returns its complement.
    GroundTruth { agreement: f64 },
}

impl Default for HumanModel {
    fn default() -> Self {
        HumanModel::GroundTruth { agreement: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoutingConfig {
    pub consent_rate: f64,
    /// Largest fraction of all matters the AI may decide.
    pub ai_fraction_cap: f64,
    #[serde(default)]
    pub human_model: HumanModel,
    #[serde(default)]
    pub policy: SelectionPolicy,
    #[serde(default)]
    pub seed: u64,
    /// Uses the first `n_matters` rows; all rows when unset.
    #[serde(default)]
    pub n_matters: Option<usize>,
}

impl RoutingConfig {
    pub fn new(consent_rate: f64, ai_fraction_cap: f64, seed: u64) -> Self {
        Self {
            consent_rate,
            ai_fraction_cap,
            human_model: HumanModel::default(),
            policy: SelectionPolicy::default(),
            seed,
            n_matters: None,
        }
    }

    pub fn validate(&self) -> Result<(), RoutingError> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(RoutingError::InvalidConfig(format!("{name} = {v} is not in [0, 1]")))
            }
        };
        prob("consent_rate", self.consent_rate)?;
        prob("ai_fraction_cap", self.ai_fraction_cap)?;
        match self.human_model {
            HumanModel::GroupRates { privileged, unprivileged } => {
                prob("human_model.privileged", privileged)?;
                prob("human_model.unprivileged", unprivileged)?;
            }
            HumanModel::GroundTruth { agreement } => prob("human_model.agreement", agreement)?,
        }
        Ok(())
    }

    /// `floor(f * n)`.
    pub fn ai_cap(&self, n: usize) -> usize {
        (self.ai_fraction_cap * n as f64 + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decider {
    Ai,
    Human,
}

/// Full record of one matter, for the trace. Never shown to humans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatterTrace {
    pub matter: usize,
    pub row_id: u64,
    pub privileged: bool,
    pub consented: bool,
    pub routed_to: Decider,
    pub ai_score: Option<f64>,
    pub ai_decision: Option<bool>,
    pub final_decision: bool,
    pub decided_by: Decider,
    pub re_evaluated: bool,
    /// Position in the final human queue.
    pub queue_position: Option<usize>,
}

/// What a human decider sees: a ticket and the case fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueRecord {
    pub ticket: usize,
    pub fields: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingSummary {
    pub n: usize,
    pub ai_cap: usize,
    pub consented: usize,
    pub non_consent: usize,
    /// Consenting matters sent to humans because the cap was reached.
    pub overflow: usize,
    pub ai_routed: usize,
    pub ai_final: usize,
    pub ai_negative: usize,
    pub human_workload: usize,
    pub re_evaluation_load: usize,
    pub favorable_rates: GroupPair<f64>,
    pub counts: GroupPair<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingResult {
    pub config: RoutingConfig,
    pub matters: Vec<MatterTrace>,
    /// Human queue in decision order.
    pub human_queue: Vec<QueueRecord>,
    pub summary: RoutingSummary,
}

impl RoutingResult {
    /// Per-matter trace, one JSON object per line.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.matters {
            out.push_str(&serde_json::to_string(m).expect("trace serializes"));
            out.push('\n');
        }
        out
    }
}

/// Runs the simulation, scoring matters with `model` only if the AI is
/// allowed to decide anything.
pub fn simulate(matters: &Dataset, model: &Model, config: &RoutingConfig) -> Result<RoutingResult, RoutingError> {
    run(matters, config, |data| Ok(model.predict(data)?.scores))
}

/// As [`simulate`] with precomputed scores, one per row of `matters`.
pub fn simulate_with_scores(matters: &Dataset, scores: &[f64], config: &RoutingConfig) -> Result<RoutingResult, RoutingError> {
    if scores.len() != matters.len() {
        return Err(RoutingError::ScoreLength { expected: matters.len(), found: scores.len() });
    }
    run(matters, config, |data| Ok(scores[..data.len()].to_vec()))
}

fn run(
    matters: &Dataset,
    config: &RoutingConfig,
    score: impl FnOnce(&Dataset) -> Result<Vec<f64>, RoutingError>,
) -> Result<RoutingResult, RoutingError> {
    config.validate()?;
    let n = config.n_matters.unwrap_or(matters.len());
    if n > matters.len() {
        return Err(RoutingError::InvalidConfig(format!("n_matters = {n} exceeds the {} rows available", matters.len())));
    }
    let positions: Vec<usize> = (0..n).collect();
    let data = if n == matters.len() { matters.clone() } else { matters.subset(&positions) };
    let seed = config.seed;
    let consented: Vec<bool> =
        (0..n).map(|i| keyed_rng(seed, streams::CONSENT, i as u64).gen::<f64>() < config.consent_rate).collect();
    let consenting: Vec<usize> = (0..n).filter(|&i| consented[i]).collect();
    let cap = config.ai_cap(n);

    let mut scores: Option<Vec<f64>> = None;
    let mut selected: Vec<usize> = Vec::new();
    if cap > 0 && !consenting.is_empty() {
        let s = score(&data)?;
        selected = match config.policy {
            SelectionPolicy::ArrivalOrder => consenting.iter().copied().take(cap).collect(),
            SelectionPolicy::Random => {
                let mut pool = consenting.clone();
                pool.shuffle(&mut keyed_rng(seed, streams::POLICY, 0));
                pool.truncate(cap);
                pool
            }
            SelectionPolicy::HighestScore => {
                let mut pool = consenting.clone();
                pool.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
                pool.truncate(cap);
                pool
            }
        };
        selected.sort_unstable();
        scores = Some(s);
    }
    let to_ai: BTreeSet<usize> = selected.iter().copied().collect();

    let labels = data.labels();
    let groups = data.groups();
    let mut traces: Vec<MatterTrace> = (0..n)
        .map(|i| MatterTrace {
            matter: i,
            row_id: data.row_id(i),
            privileged: groups[i],
            consented: consented[i],
            routed_to: if to_ai.contains(&i) { Decider::Ai } else { Decider::Human },
            ai_score: None,
            ai_decision: None,
            final_decision: false,
            decided_by: Decider::Human,
            re_evaluated: false,
            queue_position: None,
        })
        .collect();

    let mut queue: Vec<usize> = (0..n).filter(|i| !to_ai.contains(i)).collect();
    for &i in &selected {
        let s = scores.as_ref().expect("scored when routing")[i];
        let t = &mut traces[i];
        t.ai_score = Some(s);
        t.ai_decision = Some(s >= 0.5);
        if s >= 0.5 {
            t.final_decision = true;
            t.decided_by = Decider::Ai;
        } else {
            t.re_evaluated = true;
            let pos = keyed_rng(seed, streams::INSERT, i as u64).gen_range(0..=queue.len());
            queue.insert(pos, i);
        }
    }

    let schema = data.schema();
    let visible: Vec<usize> = (0..schema.columns().len()).filter(|&c| c != schema.label_index()).collect();
    let mut human_queue = Vec::with_capacity(queue.len());
    for (pos, &i) in queue.iter().enumerate() {
        let mut rng = keyed_rng(seed, streams::HUMAN, i as u64);
        let u: f64 = rng.gen();
        let decision = match config.human_model {
            HumanModel::GroupRates { privileged, unprivileged } => u < if groups[i] { privileged } else { unprivileged },
            HumanModel::GroundTruth { agreement } => {
                if u < agreement {
                    labels[i]
                } else {
                    !labels[i]
                }
            }
        };
        let t = &mut traces[i];
        t.final_decision = decision;
        t.decided_by = Decider::Human;
        t.queue_position = Some(pos);
        let fields = visible
            .iter()
            .map(|&c| (schema.columns()[c].name.clone(), data.row(i)[c].to_string()))
            .collect();
        human_queue.push(QueueRecord { ticket: pos, fields });
    }

    let summary = summarize(&traces, cap);
    Ok(RoutingResult { config: config.clone(), matters: traces, human_queue, summary })
}

fn summarize(traces: &[MatterTrace], cap: usize) -> RoutingSummary {
    let count = |f: &dyn Fn(&MatterTrace) -> bool| traces.iter().filter(|t| f(t)).count();
    let consented = count(&|t| t.consented);
    let ai_routed = count(&|t| t.routed_to == Decider::Ai);
    let ai_final = count(&|t| t.decided_by == Decider::Ai);
    let mut fav = GroupPair { unprivileged: 0usize, privileged: 0 };
    let mut counts = GroupPair { unprivileged: 0usize, privileged: 0 };
    for t in traces {
        let (f, c) = if t.privileged { (&mut fav.privileged, &mut counts.privileged) } else { (&mut fav.unprivileged, &mut counts.unprivileged) };
        *c += 1;
        *f += t.final_decision as usize;
    }
    let rate = |f: usize, c: usize| if c == 0 { 0.0 } else { f as f64 / c as f64 };
    RoutingSummary {
        n: traces.len(),
        ai_cap: cap,
        consented,
        non_consent: traces.len() - consented,
        overflow: consented - ai_routed,
        ai_routed,
        ai_final,
        ai_negative: ai_routed - ai_final,
        human_workload: count(&|t| t.decided_by == Decider::Human),
        re_evaluation_load: count(&|t| t.re_evaluated),
        favorable_rates: GroupPair {
            unprivileged: rate(fav.unprivileged, counts.unprivileged),
            privileged: rate(fav.privileged, counts.privileged),
        },
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindnessReport {
    pub passed: bool,
    pub reinserted: usize,
    pub never_routed: usize,
    /// Field paths present in one class of queue records but not the other.
    pub offending_fields: Vec<String>,
}

fn shape(value: &serde_json::Value, prefix: &str, out: &mut BTreeSet<String>) {
    use serde_json::Value as J;
    let kind = match value {
        J::Null => "null",
        J::Bool(_) => "bool",
        J::Number(_) => "number",
        J::String(_) => "string",
        J::Array(_) => "array",
        J::Object(_) => "object",
    };
    out.insert(format!("{prefix}:{kind}"));
    match value {
        J::Object(map) => {
            for (k, v) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                shape(v, &p, out);
            }
        }
        J::Array(items) => {
            for v in items {
                shape(v, &format!("{prefix}[]"), out);
            }
        }
        _ => {}
    }
}

/// Structural check that re-inserted queue records are indistinguishable
/// from never-routed ones: the set of record shapes (field paths and JSON
/// types) must be identical across the two classes.
pub fn verify_blindness(result: &RoutingResult) -> BlindnessReport {
    queue_blindness(&result.matters, &result.human_queue)
}

/// [`verify_blindness`] over arbitrary serialized queue records.
pub fn queue_blindness<T: Serialize>(matters: &[MatterTrace], queue: &[T]) -> BlindnessReport {
    let by_position: BTreeMap<usize, bool> =
        matters.iter().filter_map(|m| m.queue_position.map(|p| (p, m.re_evaluated))).collect();
    let mut shapes: [BTreeSet<Vec<String>>; 2] = [BTreeSet::new(), BTreeSet::new()];
    let mut paths: [BTreeSet<String>; 2] = [BTreeSet::new(), BTreeSet::new()];
    let mut counts = [0usize; 2];
    for (pos, record) in queue.iter().enumerate() {
        let class = by_position.get(&pos).copied().unwrap_or(false) as usize;
        let json = serde_json::to_value(record).expect("queue records serialize");
        let mut s = BTreeSet::new();
        shape(&json, "", &mut s);
        paths[class].extend(s.iter().cloned());
        shapes[class].insert(s.into_iter().collect());
        counts[class] += 1;
    }
    let vacuous = counts[0] == 0 || counts[1] == 0;
    let passed = vacuous || shapes[0] == shapes[1];
    let mut offending: BTreeSet<String> = BTreeSet::new();
    if !passed {
        offending.extend(paths[0].symmetric_difference(&paths[1]).cloned());
        if offending.is_empty() {
            let all: BTreeSet<&String> = paths[0].iter().chain(&paths[1]).collect();
            for p in all {
                let everywhere = shapes.iter().flatten().all(|s| s.contains(p));
                if !everywhere {
                    offending.insert(p.clone());
                }
            }
        }
    }
    let offending_fields = offending.into_iter().map(|p| p.split(':').next().unwrap_or("").to_string()).collect::<BTreeSet<_>>().into_iter().collect();
    BlindnessReport { passed, reinserted: counts[1], never_routed: counts[0], offending_fields }
}

/// One CSV row per routing config point.
pub fn sweep_csv(results: &[RoutingResult]) -> String {
    let mut out = String::from(
        "seed,consent_rate,ai_fraction_cap,n,consented,ai_routed,ai_final,ai_negative,overflow,human_workload,favorable_rate_unprivileged,favorable_rate_privileged\n",
    );
    for r in results {
        let s = &r.summary;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.config.seed,
            r.config.consent_rate,
            r.config.ai_fraction_cap,
            s.n,
            s.consented,
            s.ai_routed,
            s.ai_final,
            s.ai_negative,
            s.overflow,
            s.human_workload,
            s.favorable_rates.unprivileged,
            s.favorable_rates.privileged
        ));
    }
    out
}
