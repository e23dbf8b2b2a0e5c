//! Output corrections: reject-option classification and the ensemble
//! disagreement rule.
//!
//! Both favor the unprivileged group where the evidence is weak (scores
//! near the boundary, or classifiers that disagree) and record which rows
//! they changed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BOUNDARY: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum PostprocessError {
    #[error("theta = {0} is not in [0, 0.5]")]
    InvalidTheta(f64),
    #[error("{what}: expected {expected} rows, found {found}")]
    LengthMismatch { what: String, expected: usize, found: usize },
    #[error("the ensemble rule needs at least two classifiers, got {0}")]
    FewerThanTwoClassifiers(usize),
    #[error("row {row}: score {score} is not in [0, 1]")]
    ScoreOutOfRange { row: usize, score: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RejectOptionConfig {
    /// Half-width of the critical region around the boundary.
    pub theta: f64,
}

impl RejectOptionConfig {
    pub fn validate(&self) -> Result<(), PostprocessError> {
        if (0.0..=0.5).contains(&self.theta) {
            Ok(())
        } else {
            Err(PostprocessError::InvalidTheta(self.theta))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decisions {
    pub decisions: Vec<bool>,
    /// Set where the rule changed the default decision (reject option)
    /// or the classifiers disagreed (ensemble).
    pub intervened: Vec<bool>,
}

impl Decisions {
    /// Thresholding at the boundary, no interventions.
    pub fn thresholded(scores: &[f64]) -> Self {
        Self { decisions: scores.iter().map(|&s| s >= BOUNDARY).collect(), intervened: vec![false; scores.len()] }
    }

    pub fn intervention_count(&self) -> usize {
        self.intervened.iter().filter(|&&f| f).count()
    }
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<(), PostprocessError> {
    if expected == found {
        Ok(())
    } else {
        Err(PostprocessError::LengthMismatch { what: what.into(), expected, found })
    }
}

/// Inside the open band `|score - 0.5| < theta` the unprivileged get the
/// favorable outcome and the privileged the unfavorable one; elsewhere the
/// decision is `score >= 0.5`. Band edges are outside.
pub fn reject_option(scores: &[f64], groups: &[bool], config: &RejectOptionConfig) -> Result<Decisions, PostprocessError> {
    config.validate()?;
    check_len("groups", scores.len(), groups.len())?;
    let mut decisions = Vec::with_capacity(scores.len());
    let mut intervened = Vec::with_capacity(scores.len());
    for (row, (&s, &privileged)) in scores.iter().zip(groups).enumerate() {
        if !(0.0..=1.0).contains(&s) {
            return Err(PostprocessError::ScoreOutOfRange { row, score: s });
        }
        let default = s >= BOUNDARY;
        let decision = if (s - BOUNDARY).abs() < config.theta { !privileged } else { default };
        decisions.push(decision);
        intervened.push(decision != default);
    }
    Ok(Decisions { decisions, intervened })
}

/// Unanimous rows keep the shared decision; on any disagreement the
/// unprivileged get the favorable outcome and the privileged the
/// unfavorable one.
pub fn ensemble_disagreement(decision_sets: &[Vec<bool>], groups: &[bool]) -> Result<Decisions, PostprocessError> {
    if decision_sets.len() < 2 {
        return Err(PostprocessError::FewerThanTwoClassifiers(decision_sets.len()));
    }
    for (i, set) in decision_sets.iter().enumerate() {
        check_len(&format!("classifier {i}"), groups.len(), set.len())?;
    }
    let mut decisions = Vec::with_capacity(groups.len());
    let mut intervened = Vec::with_capacity(groups.len());
    for (row, &privileged) in groups.iter().enumerate() {
        let first = decision_sets[0][row];
        let unanimous = decision_sets.iter().all(|s| s[row] == first);
        decisions.push(if unanimous { first } else { !privileged });
        intervened.push(!unanimous);
    }
    Ok(Decisions { decisions, intervened })
}

/// `row_id, <score columns...>, decision, intervened` with 0/1 flags.
pub fn decisions_csv(row_ids: &[u64], scores: &[(String, Vec<f64>)], decisions: &Decisions) -> String {
    let mut out = String::from("row_id");
    for (name, _) in scores {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",decision,intervened\n");
    for (i, id) in row_ids.iter().enumerate() {
        out.push_str(&id.to_string());
        for (_, s) in scores {
            out.push(',');
            out.push_str(&s[i].to_string());
        }
        out.push_str(&format!(",{},{}\n", decisions.decisions[i] as u8, decisions.intervened[i] as u8));
    }
    out
}
