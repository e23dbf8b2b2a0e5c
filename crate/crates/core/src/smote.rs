//! Synthetic minority rows by nearest-neighbour interpolation.
//!
//! Numeric features are interpolated between a base row and one of its `k`
//! nearest neighbours inside the same (group, label) cell; categorical
//! features are copied from the base. Neighbours use plain Euclidean
//! distance on the numeric features, ties to the lower row id.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ColumnKind, DataError, Dataset, Value};
use crate::neighbors::{k_nearest, Point};
use crate::rng::{keyed_rng, streams};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error)]
pub enum SmoteError {
    #[error("target cell has {size} rows; at least 2 are needed")]
    CellTooSmall { size: usize },
    #[error("dataset has no numeric feature to interpolate")]
    NoNumericFeatures,
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// A (protected group, label) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub privileged: bool,
    pub favorable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutcome {
    pub data: Dataset,
    pub added_ids: Vec<u64>,
    pub k_used: usize,
    pub warnings: Vec<String>,
}

fn cell_positions(data: &Dataset, cell: Cell) -> Vec<usize> {
    (0..data.len()).filter(|&i| data.group_of(i) == cell.privileged && data.label_of(i) == cell.favorable).collect()
}

/// Rows to add so `cell` matches the largest of the four cells.
pub fn equalizing_count(data: &Dataset, cell: Cell) -> usize {
    let sizes: Vec<usize> = [(false, false), (false, true), (true, false), (true, true)]
        .iter()
        .map(|&(privileged, favorable)| cell_positions(data, Cell { privileged, favorable }).len())
        .collect();
    let own = cell_positions(data, cell).len();
    sizes.into_iter().max().unwrap_or(0).saturating_sub(own)
}

/// Appends `count` synthetic rows to `cell`. Row `i` of the batch draws its
/// base, neighbour and interpolation weight from its own keyed generator.
pub fn smote_augment(data: &Dataset, k: usize, cell: Cell, count: usize, seed: u64) -> Result<SmoteOutcome, SmoteError> {
    if k == 0 {
        return Err(SmoteError::ZeroK);
    }
    let schema = data.schema();
    let numeric: Vec<usize> =
        schema.feature_indices().into_iter().filter(|&i| schema.columns()[i].kind == ColumnKind::Numeric).collect();
    if numeric.is_empty() {
        return Err(SmoteError::NoNumericFeatures);
    }
    let members = cell_positions(data, cell);
    if members.len() < 2 {
        return Err(SmoteError::CellTooSmall { size: members.len() });
    }
    let mut warnings = Vec::new();
    let k_used = if k > members.len() - 1 {
        warnings.push(format!("k = {k} exceeds cell size - 1; using k = {}", members.len() - 1));
        members.len() - 1
    } else {
        k
    };
    let points: Vec<Point> = members
        .iter()
        .map(|&i| Point { num: numeric.iter().map(|&c| data.row(i)[c].as_num().unwrap_or(0.0)).collect(), cat: Vec::new() })
        .collect();
    let ids: Vec<u64> = members.iter().map(|&i| data.row_id(i)).collect();
    let neighbours: Vec<Vec<usize>> =
        (0..members.len()).map(|b| k_nearest(&points, &ids, &points[b], k_used, Some(b))).collect();

    let first_id = data.max_row_id().map_or(0, |m| m + 1);
    let mut extra = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = keyed_rng(seed, streams::SMOTE, i as u64);
        let b = rng.gen_range(0..members.len());
        let nb = neighbours[b][rng.gen_range(0..k_used)];
        let u: f64 = rng.gen();
        let mut record = data.row(members[b]).clone();
        for (j, &c) in numeric.iter().enumerate() {
            let (x0, x1) = (points[b].num[j], points[nb].num[j]);
            let v = (x0 + u * (x1 - x0)).clamp(x0.min(x1), x0.max(x1));
            record[c] = Value::Num(v);
        }
        extra.push((first_id + i as u64, record));
    }
    let added_ids = extra.iter().map(|(id, _)| *id).collect();
    let data = data.with_synthetic_rows(extra)?;
    Ok(SmoteOutcome { data, added_ids, k_used, warnings })
}
