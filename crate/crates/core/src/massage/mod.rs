//! Label massaging.
//!
//! Rows are ranked by a naive-Bayes estimate of the favorable outcome. The
//! top-ranked unprivileged negatives are promoted and the bottom-ranked
//! privileged positives are demoted, `M` of each, where `M` is the least
//! count that closes the gap in favorable rates. The emitted
//! [`MassagePlan`] is the complete list of changed rows.

mod ranker;

pub use ranker::{rank_samples, NaiveBayesRanker, LAPLACE_ALPHA};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};

#[derive(Debug, Error)]
pub enum MassageError {
    #[error("dataset has a single label value")]
    SingleClassDataset,
    #[error("the {0} group is empty")]
    EmptyGroup(&'static str),
    #[error("expected {expected} scores, got {got}")]
    ScoreLength { expected: usize, got: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Rows chosen for relabelling, in flip order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassagePlan {
    pub m: usize,
    /// Unprivileged, unfavorable rows; descending score.
    pub promotions: Vec<u64>,
    /// Privileged, favorable rows; ascending score.
    pub demotions: Vec<u64>,
    #[serde(skip)]
    pub scores: Vec<f64>,
}

/// Result of [`compute_m`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlipCount {
    /// Flips per direction that will be applied.
    pub m: usize,
    /// Flips per direction needed to close the gap, before clamping.
    pub required: usize,
    /// `true` when candidates ran out (`m < required`).
    pub clamped: bool,
}

#[derive(Debug, Clone)]
pub struct MassageOutcome {
    pub data: Dataset,
    pub plan: MassagePlan,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct GroupCounts {
    n_priv: usize,
    n_unpriv: usize,
    pos_priv: usize,
    pos_unpriv: usize,
}

fn group_counts(data: &Dataset) -> Result<GroupCounts, MassageError> {
    let mut c = GroupCounts { n_priv: 0, n_unpriv: 0, pos_priv: 0, pos_unpriv: 0 };
    for (y, g) in data.labels().into_iter().zip(data.groups()) {
        if g {
            c.n_priv += 1;
            c.pos_priv += y as usize;
        } else {
            c.n_unpriv += 1;
            c.pos_unpriv += y as usize;
        }
    }
    if c.n_unpriv == 0 {
        return Err(MassageError::EmptyGroup("unprivileged"));
    }
    if c.n_priv == 0 {
        return Err(MassageError::EmptyGroup("privileged"));
    }
    Ok(c)
}

/// Least `M` with `(pos_u + M)/n_u >= (pos_p - M)/n_p`, i.e.
/// `ceil((pos_p * n_u - pos_u * n_p) / (n_p + n_u))`, floored at zero.
pub fn required_flips(n_priv: usize, pos_priv: usize, n_unpriv: usize, pos_unpriv: usize) -> usize {
    let num = pos_priv as i128 * n_unpriv as i128 - pos_unpriv as i128 * n_priv as i128;
    let den = (n_priv + n_unpriv) as i128;
    if num <= 0 {
        0
    } else {
        ((num + den - 1) / den) as usize
    }
}

pub fn compute_m(data: &Dataset) -> Result<FlipCount, MassageError> {
    let c = group_counts(data)?;
    let required = required_flips(c.n_priv, c.pos_priv, c.n_unpriv, c.pos_unpriv);
    let available = (c.n_unpriv - c.pos_unpriv).min(c.pos_priv);
    let m = required.min(available);
    Ok(FlipCount { m, required, clamped: m < required })
}

/// Builds the plan from externally supplied scores. Only the ranking of the
/// scores matters; ties go to the lower row id.
pub fn plan_from_scores(data: &Dataset, scores: &[f64]) -> Result<(MassagePlan, FlipCount), MassageError> {
    if scores.len() != data.len() {
        return Err(MassageError::ScoreLength { expected: data.len(), got: scores.len() });
    }
    let count = compute_m(data)?;
    let labels = data.labels();
    let groups = data.groups();
    let mut promote: Vec<usize> = (0..data.len()).filter(|&i| !groups[i] && !labels[i]).collect();
    let mut demote: Vec<usize> = (0..data.len()).filter(|&i| groups[i] && labels[i]).collect();
    promote.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(data.row_id(a).cmp(&data.row_id(b))));
    demote.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(data.row_id(a).cmp(&data.row_id(b))));
    let plan = MassagePlan {
        m: count.m,
        promotions: promote[..count.m].iter().map(|&i| data.row_id(i)).collect(),
        demotions: demote[..count.m].iter().map(|&i| data.row_id(i)).collect(),
        scores: scores.to_vec(),
    };
    Ok((plan, count))
}

/// Applies a plan: promotions become favorable, demotions unfavorable.
pub fn apply_plan(data: &Dataset, plan: &MassagePlan) -> Dataset {
    let index = data.id_index();
    let mut changes = Vec::with_capacity(2 * plan.m);
    for id in &plan.promotions {
        changes.push((index[id], true));
    }
    for id in &plan.demotions {
        changes.push((index[id], false));
    }
    data.with_labels(&changes)
}

pub fn massage(data: &Dataset) -> Result<MassageOutcome, MassageError> {
    group_counts(data)?;
    let scores = rank_samples(data)?;
    massage_with_scores(data, &scores)
}

pub fn massage_with_scores(data: &Dataset, scores: &[f64]) -> Result<MassageOutcome, MassageError> {
    let (plan, count) = plan_from_scores(data, scores)?;
    let mut warnings = Vec::new();
    if count.clamped {
        warnings.push(format!(
            "insufficient candidates: {} flips per direction needed, {} available",
            count.required, count.m
        ));
    }
    Ok(MassageOutcome { data: apply_plan(data, &plan), plan, warnings })
}
