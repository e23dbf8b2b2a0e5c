use std::collections::HashSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DataError, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Feature,
    Protected,
    Label,
}

impl FromStr for ColumnKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "numeric" => Ok(Self::Numeric),
            "categorical" => Ok(Self::Categorical),
            other => Err(format!("unknown column kind `{other}`")),
        }
    }
}

impl FromStr for ColumnRole {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "feature" => Ok(Self::Feature),
            "protected" => Ok(Self::Protected),
            "label" => Ok(Self::Label),
            other => Err(format!("unknown column role `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind, role: ColumnRole) -> Self {
        Self { name: name.into(), kind, role }
    }
}

/// Column layout plus the two binary encodings.
///
/// The complement values (`unfavorable`, `unprivileged`) may be declared in
/// the schema file; otherwise they are taken from the data when a
/// [`Dataset`](super::Dataset) is built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<Column>,
    favorable_label: String,
    unfavorable_label: Option<String>,
    privileged_value: String,
    unprivileged_value: Option<String>,
    label: usize,
    protected: usize,
}

impl Schema {
    pub fn new(
        columns: Vec<Column>,
        favorable_label: impl Into<String>,
        privileged_value: impl Into<String>,
    ) -> Result<Self, DataError> {
        let mut names = HashSet::new();
        for c in &columns {
            if c.name.trim().is_empty() {
                return Err(DataError::InvalidSchema("empty column name".into()));
            }
            if !names.insert(c.name.as_str()) {
                return Err(DataError::InvalidSchema(format!("duplicate column `{}`", c.name)));
            }
        }
        let find_role = |role: ColumnRole| -> Result<usize, DataError> {
            let hits: Vec<usize> =
                columns.iter().enumerate().filter(|(_, c)| c.role == role).map(|(i, _)| i).collect();
            match hits.as_slice() {
                [one] => Ok(*one),
                _ => Err(DataError::InvalidSchema(format!(
                    "expected exactly one {role:?} column, found {}",
                    hits.len()
                ))),
            }
        };
        let label = find_role(ColumnRole::Label)?;
        let protected = find_role(ColumnRole::Protected)?;
        for idx in [label, protected] {
            if columns[idx].kind != ColumnKind::Categorical {
                return Err(DataError::InvalidSchema(format!(
                    "column `{}` must be categorical",
                    columns[idx].name
                )));
            }
        }
        Ok(Self {
            columns,
            favorable_label: favorable_label.into(),
            unfavorable_label: None,
            privileged_value: privileged_value.into(),
            unprivileged_value: None,
            label,
            protected,
        })
    }

    /// Parses the declarative schema format:
    ///
    /// ```text
    /// # comment
    /// age numeric feature
    /// zip categorical feature
    /// race categorical protected
    /// outcome categorical label
    /// favorable granted
    /// privileged white
    /// ```
    ///
    /// `unfavorable <value>` and `unprivileged <value>` are optional.
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut columns = Vec::new();
        let mut favorable = None;
        let mut privileged = None;
        let mut unfavorable = None;
        let mut unprivileged = None;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let err = |message: String| DataError::SchemaParse { line: line_no, message };
            match parts.as_slice() {
                ["favorable", v] => favorable = Some(v.to_string()),
                ["privileged", v] => privileged = Some(v.to_string()),
                ["unfavorable", v] => unfavorable = Some(v.to_string()),
                ["unprivileged", v] => unprivileged = Some(v.to_string()),
                [name, kind, role] => {
                    let kind = kind.parse::<ColumnKind>().map_err(err)?;
                    let role = role.parse::<ColumnRole>().map_err(err)?;
                    columns.push(Column::new(*name, kind, role));
                }
                _ => return Err(err(format!("cannot parse `{line}`"))),
            }
        }
        let favorable = favorable
            .ok_or_else(|| DataError::InvalidSchema("missing `favorable <value>` directive".into()))?;
        let privileged = privileged
            .ok_or_else(|| DataError::InvalidSchema("missing `privileged <value>` directive".into()))?;
        let mut schema = Self::new(columns, favorable, privileged)?;
        if unfavorable.as_deref() == Some(schema.favorable_label.as_str())
            || unprivileged.as_deref() == Some(schema.privileged_value.as_str())
        {
            return Err(DataError::InvalidSchema("complement equals the primary value".into()));
        }
        schema.unfavorable_label = unfavorable;
        schema.unprivileged_value = unprivileged;
        Ok(schema)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Renders back to the declarative format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.columns {
            let kind = match c.kind {
                ColumnKind::Numeric => "numeric",
                ColumnKind::Categorical => "categorical",
            };
            let role = match c.role {
                ColumnRole::Feature => "feature",
                ColumnRole::Protected => "protected",
                ColumnRole::Label => "label",
            };
            out.push_str(&format!("{} {kind} {role}\n", c.name));
        }
        out.push_str(&format!("favorable {}\n", self.favorable_label));
        out.push_str(&format!("privileged {}\n", self.privileged_value));
        if let Some(v) = &self.unfavorable_label {
            out.push_str(&format!("unfavorable {v}\n"));
        }
        if let Some(v) = &self.unprivileged_value {
            out.push_str(&format!("unprivileged {v}\n"));
        }
        out
    }

    pub(super) fn fill_complements(&mut self, label: Option<String>, group: Option<String>) {
        if self.unfavorable_label.is_none() {
            self.unfavorable_label = label;
        }
        if self.unprivileged_value.is_none() {
            self.unprivileged_value = group;
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn label_index(&self) -> usize {
        self.label
    }

    pub fn protected_index(&self) -> usize {
        self.protected
    }

    pub fn label_name(&self) -> &str {
        &self.columns[self.label].name
    }

    pub fn protected_name(&self) -> &str {
        &self.columns[self.protected].name
    }

    /// Indices of feature-role columns, in schema order.
    pub fn feature_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == ColumnRole::Feature)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn favorable_label(&self) -> &str {
        &self.favorable_label
    }

    pub fn privileged_value(&self) -> &str {
        &self.privileged_value
    }

    pub fn unfavorable_label(&self) -> String {
        self.unfavorable_label.clone().unwrap_or_else(|| format!("not_{}", self.favorable_label))
    }

    pub fn unprivileged_value(&self) -> String {
        self.unprivileged_value.clone().unwrap_or_else(|| format!("not_{}", self.privileged_value))
    }

    pub fn is_favorable(&self, v: &Value) -> bool {
        v.as_cat() == Some(self.favorable_label.as_str())
    }

    pub fn is_privileged(&self, v: &Value) -> bool {
        v.as_cat() == Some(self.privileged_value.as_str())
    }

    pub fn label_value(&self, favorable: bool) -> Value {
        if favorable {
            Value::Cat(self.favorable_label.clone())
        } else {
            Value::Cat(self.unfavorable_label())
        }
    }

    pub fn group_value(&self, privileged: bool) -> Value {
        if privileged {
            Value::Cat(self.privileged_value.clone())
        } else {
            Value::Cat(self.unprivileged_value())
        }
    }

    /// Same layout with some columns switched to categorical.
    pub(crate) fn with_kinds(&self, categorical: &[usize]) -> Self {
        let mut out = self.clone();
        for &i in categorical {
            out.columns[i].kind = ColumnKind::Categorical;
        }
        out
    }
}
