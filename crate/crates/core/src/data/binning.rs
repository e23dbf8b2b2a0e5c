use serde::{Deserialize, Serialize};

use super::{ColumnKind, ColumnRole, DataError, Dataset, Value};

pub const DEFAULT_BINS: usize = 8;

/// Equal-width bin edges for one numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinEdges {
    pub column: String,
    /// `bins + 1` edges from min to max.
    pub edges: Vec<f64>,
}

impl BinEdges {
    pub fn fit(column: &str, values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
        Self { column: column.to_string(), edges }
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Bin index; values outside the fitted range clamp to the end bins.
    pub fn index(&self, v: f64) -> usize {
        let lo = self.edges[0];
        let hi = self.edges[self.bins()];
        if hi <= lo {
            return 0;
        }
        let pos = ((v - lo) / (hi - lo) * self.bins() as f64).floor();
        (pos.max(0.0) as usize).min(self.bins() - 1)
    }

    pub fn label(&self, idx: usize) -> String {
        let width = (self.bins() - 1).to_string().len();
        format!("b{idx:0width$}")
    }

    pub fn apply(&self, v: f64) -> String {
        self.label(self.index(v))
    }
}

/// Replaces every numeric feature column with its equal-width bin label.
///
/// With `edges = None` the edges are fitted on `data`; pass previously fitted
/// edges to bin held-out data consistently.
pub fn bin_numeric(
    data: &Dataset,
    bins: usize,
    edges: Option<&[BinEdges]>,
) -> Result<(Dataset, Vec<BinEdges>), DataError> {
    let schema = data.schema();
    let numeric: Vec<usize> = schema
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColumnKind::Numeric && c.role == ColumnRole::Feature)
        .map(|(i, _)| i)
        .collect();
    let fitted: Vec<BinEdges> = match edges {
        Some(e) => {
            let mut out = Vec::with_capacity(numeric.len());
            for &i in &numeric {
                let name = &schema.columns()[i].name;
                let found = e
                    .iter()
                    .find(|b| &b.column == name)
                    .ok_or_else(|| DataError::MissingColumn(name.clone()))?;
                out.push(found.clone());
            }
            out
        }
        None => numeric
            .iter()
            .map(|&i| {
                let vals: Vec<f64> = data.rows().iter().filter_map(|r| r[i].as_num()).collect();
                BinEdges::fit(&schema.columns()[i].name, &vals, bins)
            })
            .collect(),
    };
    let rows = data
        .rows()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            for (&i, e) in numeric.iter().zip(&fitted) {
                if let Value::Num(v) = r[i] {
                    r[i] = Value::Cat(e.apply(v));
                }
            }
            r
        })
        .collect();
    let binned = Dataset::from_parts(
        schema.with_kinds(&numeric),
        rows,
        data.row_ids().to_vec(),
        data.synthetic_flags().to_vec(),
    )?;
    Ok((binned, fitted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_width_and_clamping() {
        let e = BinEdges::fit("x", &[0.0, 8.0], 8);
        assert_eq!(e.edges.len(), 9);
        assert_eq!(e.index(0.0), 0);
        assert_eq!(e.index(0.99), 0);
        assert_eq!(e.index(1.0), 1);
        assert_eq!(e.index(8.0), 7);
        assert_eq!(e.index(-5.0), 0);
        assert_eq!(e.index(50.0), 7);
    }

    #[test]
    fn constant_column_single_bin() {
        let e = BinEdges::fit("x", &[3.0, 3.0], 8);
        assert_eq!(e.index(3.0), 0);
        assert_eq!(e.index(100.0), 0);
    }

    #[test]
    fn labels_sort_naturally() {
        let e = BinEdges::fit("x", &[0.0, 1.0], 12);
        assert_eq!(e.label(3), "b03");
        assert!(e.label(3) < e.label(11));
    }
}
