use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::data::{ColumnKind, Dataset, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodedColumn {
    /// Standardized with the training mean and spread (spread 1 if constant).
    Numeric { name: String, mean: f64, std: f64 },
    /// One indicator per training level; unseen levels encode as all zeros.
    Categorical { name: String, levels: Vec<String> },
}

/// Feature encoding frozen at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub columns: Vec<EncodedColumn>,
}

impl Encoder {
    /// Encodes the feature columns, plus the protected column when
    /// `include_protected` is set.
    pub fn fit(data: &Dataset, include_protected: bool) -> Self {
        let schema = data.schema();
        let mut idx = schema.feature_indices();
        if include_protected {
            idx.push(schema.protected_index());
            idx.sort_unstable();
        }
        let columns = idx
            .into_iter()
            .map(|i| {
                let col = &schema.columns()[i];
                match col.kind {
                    ColumnKind::Numeric => {
                        let vals: Vec<f64> = data.rows().iter().filter_map(|r| r[i].as_num()).collect();
                        let n = vals.len().max(1) as f64;
                        let mean = vals.iter().sum::<f64>() / n;
                        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
                        EncodedColumn::Numeric { name: col.name.clone(), mean, std }
                    }
                    ColumnKind::Categorical => {
                        let mut levels: Vec<String> =
                            data.rows().iter().filter_map(|r| r[i].as_cat().map(str::to_string)).collect();
                        levels.sort();
                        levels.dedup();
                        EncodedColumn::Categorical { name: col.name.clone(), levels }
                    }
                }
            })
            .collect();
        Self { columns }
    }

    pub fn width(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c {
                EncodedColumn::Numeric { .. } => 1,
                EncodedColumn::Categorical { levels, .. } => levels.len(),
            })
            .sum()
    }

    /// Names of the encoded coordinates, e.g. `age` or `color=red`.
    pub fn coordinate_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .flat_map(|c| match c {
                EncodedColumn::Numeric { name, .. } => vec![name.clone()],
                EncodedColumn::Categorical { name, levels } => levels.iter().map(|l| format!("{name}={l}")).collect(),
            })
            .collect()
    }

    /// Encoded rows plus one warning per column that met unseen levels.
    pub fn encode(&self, data: &Dataset) -> Result<(Vec<Vec<f64>>, Vec<String>), ClassifierError> {
        let schema = data.schema();
        let mut idx = Vec::with_capacity(self.columns.len());
        for c in &self.columns {
            let name = match c {
                EncodedColumn::Numeric { name, .. } | EncodedColumn::Categorical { name, .. } => name,
            };
            let i = schema
                .index_of(name)
                .ok_or_else(|| ClassifierError::EncodingMismatch(format!("column `{name}` is missing")))?;
            let kind_ok = matches!(
                (c, schema.columns()[i].kind),
                (EncodedColumn::Numeric { .. }, ColumnKind::Numeric) | (EncodedColumn::Categorical { .. }, ColumnKind::Categorical)
            );
            if !kind_ok {
                return Err(ClassifierError::EncodingMismatch(format!("column `{name}` changed kind")));
            }
            idx.push(i);
        }
        let mut unseen = vec![0usize; self.columns.len()];
        let width = self.width();
        let rows = data
            .rows()
            .iter()
            .map(|r| {
                let mut out = Vec::with_capacity(width);
                for (j, (c, &i)) in self.columns.iter().zip(&idx).enumerate() {
                    match (c, &r[i]) {
                        (EncodedColumn::Numeric { mean, std, .. }, Value::Num(v)) => out.push((v - mean) / std),
                        (EncodedColumn::Categorical { levels, .. }, Value::Cat(s)) => {
                            let hit = levels.iter().position(|l| l == s);
                            if hit.is_none() {
                                unseen[j] += 1;
                            }
                            out.extend((0..levels.len()).map(|k| if Some(k) == hit { 1.0 } else { 0.0 }));
                        }
                        _ => unreachable!("dataset values match column kinds"),
                    }
                }
                out
            })
            .collect();
        let warnings = self
            .columns
            .iter()
            .zip(&unseen)
            .filter(|(_, n)| **n > 0)
            .map(|(c, n)| {
                let name = match c {
                    EncodedColumn::Numeric { name, .. } | EncodedColumn::Categorical { name, .. } => name,
                };
                format!("column `{name}`: {n} rows with levels unseen in training, encoded as all zeros")
            })
            .collect();
        Ok((rows, warnings))
    }
}
