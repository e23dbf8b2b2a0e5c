//! Tabular datasets with one binary label and one binary protected attribute.
//!
//! A [`Dataset`] is immutable once built. Repairs produce new datasets that
//! keep every original `row_id`, so an auditor can diff records one by one.

mod binning;
mod csv_io;
mod joint;
mod schema;
mod synthetic;

pub use binning::{bin_numeric, BinEdges, DEFAULT_BINS};
pub use csv_io::{load_csv, read_csv, write_csv, write_csv_to, SYNTHETIC_COLUMN};
pub use joint::{empirical_joint, empirical_joint_with_cap, JointCell, JointDistribution, DEFAULT_DOMAIN_CAP};
pub use schema::{Column, ColumnKind, ColumnRole, Schema};
pub use synthetic::{generate_synthetic, GeneratorConfig, GROUP_COLUMN, LABEL_COLUMN, PROXY_COLUMN};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("type mismatch at row {row}, column `{column}`: `{value}` is not numeric")]
    TypeMismatch { row: usize, column: String, value: String },
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("file is empty")]
    EmptyFile,
    #[error("duplicate header `{0}`")]
    DuplicateHeader(String),
    #[error("column `{column}` must be binary, found values {values:?}")]
    NonBinaryColumn { column: String, values: Vec<String> },
    #[error("row {row} has {found} values, schema has {expected} columns")]
    RowWidth { row: usize, found: usize, expected: usize },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("schema line {line}: {message}")]
    SchemaParse { line: usize, message: String },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("feature domain has {size} cells, cap is {cap}")]
    DomainTooLarge { size: usize, cap: usize },
    #[error("column `{0}` is numeric; bin it before building a joint distribution")]
    NumericColumnSelected(String),
    #[error("column `{0}` is not a feature column")]
    NotAFeature(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// A single cell value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Cat(String),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            Value::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Value::Cat(s) => Some(s),
            Value::Num(_) => None,
        }
    }

    pub fn cat(s: impl Into<String>) -> Self {
        Value::Cat(s.into())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Cat(s) => f.write_str(s),
        }
    }
}

pub type Record = Vec<Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<Record>,
    row_ids: Vec<u64>,
    synthetic: Vec<bool>,
}

impl Dataset {
    /// Builds a dataset with row ids `0..rows.len()`.
    ///
    /// Resolves the schema's unfavorable/unprivileged values from the data
    /// when the schema leaves them implicit.
    pub fn new(schema: Schema, rows: Vec<Record>) -> Result<Self, DataError> {
        let row_ids = (0..rows.len() as u64).collect();
        let synthetic = vec![false; rows.len()];
        Self::from_parts(schema, rows, row_ids, synthetic)
    }

    pub fn from_parts(
        mut schema: Schema,
        rows: Vec<Record>,
        row_ids: Vec<u64>,
        synthetic: Vec<bool>,
    ) -> Result<Self, DataError> {
        if rows.len() != row_ids.len() || rows.len() != synthetic.len() {
            return Err(DataError::InvalidSchema(
                "rows, row ids and provenance flags differ in length".into(),
            ));
        }
        let width = schema.columns().len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(DataError::RowWidth { row: i, found: row.len(), expected: width });
            }
            for (col, value) in schema.columns().iter().zip(row) {
                let ok = match (col.kind, value) {
                    (ColumnKind::Numeric, Value::Num(v)) => v.is_finite(),
                    (ColumnKind::Categorical, Value::Cat(_)) => true,
                    _ => false,
                };
                if !ok {
                    return Err(DataError::TypeMismatch {
                        row: row_ids[i] as usize,
                        column: col.name.clone(),
                        value: value.to_string(),
                    });
                }
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(row_ids.len());
        for id in &row_ids {
            if !seen.insert(*id) {
                return Err(DataError::InvalidSchema(format!("duplicate row id {id}")));
            }
        }
        let label = schema.label_index();
        let protected = schema.protected_index();
        let other_label = resolve_binary(&schema.columns()[label].name, &rows, label, schema.favorable_label())?;
        let other_group =
            resolve_binary(&schema.columns()[protected].name, &rows, protected, schema.privileged_value())?;
        schema.fill_complements(other_label, other_group);
        Ok(Self { schema, rows, row_ids, synthetic })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Record] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Record {
        &self.rows[i]
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    pub fn row_id(&self, i: usize) -> u64 {
        self.row_ids[i]
    }

    pub fn synthetic_flags(&self) -> &[bool] {
        &self.synthetic
    }

    pub fn is_synthetic(&self, i: usize) -> bool {
        self.synthetic[i]
    }

    /// Position of each row id.
    pub fn id_index(&self) -> HashMap<u64, usize> {
        self.row_ids.iter().enumerate().map(|(i, id)| (*id, i)).collect()
    }

    /// `true` where the row carries the favorable label.
    pub fn labels(&self) -> Vec<bool> {
        let idx = self.schema.label_index();
        self.rows.iter().map(|r| self.schema.is_favorable(&r[idx])).collect()
    }

    /// `true` where the row belongs to the privileged group.
    pub fn groups(&self) -> Vec<bool> {
        let idx = self.schema.protected_index();
        self.rows.iter().map(|r| self.schema.is_privileged(&r[idx])).collect()
    }

    pub fn label_of(&self, i: usize) -> bool {
        self.schema.is_favorable(&self.rows[i][self.schema.label_index()])
    }

    pub fn group_of(&self, i: usize) -> bool {
        self.schema.is_privileged(&self.rows[i][self.schema.protected_index()])
    }

    /// Copy of this dataset with the given rows' labels replaced.
    pub fn with_labels(&self, changes: &[(usize, bool)]) -> Self {
        let mut out = self.clone();
        let idx = self.schema.label_index();
        for &(i, favorable) in changes {
            out.rows[i][idx] = self.schema.label_value(favorable);
        }
        out
    }

    /// Copy with rows replaced at the given positions; ids and flags kept.
    pub fn with_rows(&self, rows: Vec<Record>) -> Result<Self, DataError> {
        Self::from_parts(self.schema.clone(), rows, self.row_ids.clone(), self.synthetic.clone())
    }

    /// Appends rows flagged as synthetic.
    pub fn with_synthetic_rows(&self, extra: Vec<(u64, Record)>) -> Result<Self, DataError> {
        let mut rows = self.rows.clone();
        let mut ids = self.row_ids.clone();
        let mut flags = self.synthetic.clone();
        for (id, rec) in extra {
            rows.push(rec);
            ids.push(id);
            flags.push(true);
        }
        Self::from_parts(self.schema.clone(), rows, ids, flags)
    }

    /// Drops every synthetic row.
    pub fn strip_synthetic(&self) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| !self.synthetic[i]).collect();
        self.subset(&keep)
    }

    /// Rows at the given positions, in that order.
    pub fn subset(&self, positions: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            rows: positions.iter().map(|&i| self.rows[i].clone()).collect(),
            row_ids: positions.iter().map(|&i| self.row_ids[i]).collect(),
            synthetic: positions.iter().map(|&i| self.synthetic[i]).collect(),
        }
    }

    pub fn max_row_id(&self) -> Option<u64> {
        self.row_ids.iter().copied().max()
    }

    /// Column values by name.
    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let idx = self.schema.index_of(name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }
}

fn resolve_binary(
    column: &str,
    rows: &[Record],
    idx: usize,
    primary: &str,
) -> Result<Option<String>, DataError> {
    let mut values: Vec<String> = Vec::new();
    for row in rows {
        if let Value::Cat(s) = &row[idx] {
            if !values.iter().any(|v| v == s) {
                values.push(s.clone());
            }
        }
    }
    let others: Vec<&String> = values.iter().filter(|v| v.as_str() != primary).collect();
    if others.len() > 1 {
        values.sort();
        return Err(DataError::NonBinaryColumn { column: column.to_string(), values });
    }
    Ok(others.first().map(|s| s.to_string()))
}
