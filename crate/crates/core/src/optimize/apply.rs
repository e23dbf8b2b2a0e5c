use std::collections::HashMap;

use rand::Rng;

use super::{OptimizeError, RepairMap, SourceCell};
use crate::data::{ColumnKind, DataError, Dataset, Value};
use crate::rng::{keyed_rng, streams};

/// Redraws each row's mapped features and label from its source cell's row
/// of the map. Draws are keyed by row id, so the result does not depend on
/// row order. Unmapped features and the protected column pass through.
pub fn apply_repair(data: &Dataset, map: &RepairMap, seed: u64) -> Result<Dataset, OptimizeError> {
    map.validate_shape()?;
    let schema = data.schema();
    let mut cols = Vec::with_capacity(map.features.len());
    for name in &map.features {
        let i = schema.index_of(name).ok_or_else(|| DataError::MissingColumn(name.clone()))?;
        if schema.columns()[i].kind != ColumnKind::Categorical {
            return Err(DataError::NumericColumnSelected(name.clone()).into());
        }
        cols.push(i);
    }
    let label = schema.label_index();
    let index: HashMap<&SourceCell, usize> = map.source_cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut rows = Vec::with_capacity(data.len());
    for (r, record) in data.rows().iter().enumerate() {
        let cell = SourceCell {
            x: cols.iter().map(|&i| record[i].to_string()).collect(),
            favorable: data.label_of(r),
            privileged: data.group_of(r),
        };
        let row_id = data.row_id(r);
        let &s = index.get(&cell).ok_or_else(|| OptimizeError::UnmappedCell { row_id, cell: cell.to_string() })?;
        let probs = map.row(s);
        let u: f64 = keyed_rng(seed, streams::REPAIR, row_id).gen();
        let mut acc = 0.0;
        let mut pick = None;
        for (t, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            pick = Some(t);
            if u < acc {
                break;
            }
        }
        let t = pick.ok_or_else(|| OptimizeError::MapMismatch(format!("row for {cell} has no positive entry")))?;
        let target = &map.target_cells[t];
        let mut out = record.clone();
        for (&i, v) in cols.iter().zip(&target.x) {
            out[i] = Value::Cat(v.clone());
        }
        out[label] = schema.label_value(target.favorable);
        rows.push(out);
    }
    Ok(data.with_rows(rows)?)
}
