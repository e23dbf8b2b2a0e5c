use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ColumnKind, ColumnRole, DataError, Dataset};

pub const DEFAULT_DOMAIN_CAP: usize = 4096;

/// One `(x, y, z)` cell with positive count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointCell {
    pub x: Vec<String>,
    pub favorable: bool,
    pub privileged: bool,
    pub count: usize,
    pub mass: f64,
}

/// Empirical probability table over features, label and protected group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub features: Vec<String>,
    /// Sorted observed values per feature.
    pub domains: Vec<Vec<String>>,
    /// Cells ordered by `(x, favorable, privileged)`.
    pub cells: Vec<JointCell>,
    pub total: usize,
}

impl JointDistribution {
    /// Builds a table directly from counts; cells with zero count are dropped.
    pub fn from_counts(
        features: Vec<String>,
        domains: Vec<Vec<String>>,
        counts: Vec<(Vec<String>, bool, bool, usize)>,
    ) -> Self {
        let mut merged: BTreeMap<(Vec<String>, bool, bool), usize> = BTreeMap::new();
        for (x, y, z, c) in counts {
            *merged.entry((x, y, z)).or_default() += c;
        }
        let total: usize = merged.values().sum();
        let cells = merged
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|((x, favorable, privileged), count)| JointCell {
                x,
                favorable,
                privileged,
                count,
                mass: count as f64 / total as f64,
            })
            .collect();
        Self { features, domains, cells, total }
    }

    /// Number of cells in the full `x` domain product.
    pub fn feature_domain_size(&self) -> usize {
        self.domains.iter().map(|d| d.len()).product()
    }

    /// Every `x` tuple in the domain product, lexicographic in domain order.
    pub fn feature_tuples(&self) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = vec![Vec::new()];
        for dom in &self.domains {
            let mut next = Vec::with_capacity(out.len() * dom.len());
            for prefix in &out {
                for v in dom {
                    let mut t = prefix.clone();
                    t.push(v.clone());
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    pub fn mass_sum(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).sum()
    }

    /// `P(Y = favorable)`.
    pub fn favorable_rate(&self) -> f64 {
        self.cells.iter().filter(|c| c.favorable).map(|c| c.mass).sum()
    }

    /// `P(Z = z)`.
    pub fn group_mass(&self, privileged: bool) -> f64 {
        self.cells.iter().filter(|c| c.privileged == privileged).map(|c| c.mass).sum()
    }
}

/// Empirical joint over `feature_subset` with the default domain cap.
pub fn empirical_joint(data: &Dataset, feature_subset: &[String]) -> Result<JointDistribution, DataError> {
    empirical_joint_with_cap(data, feature_subset, DEFAULT_DOMAIN_CAP)
}

pub fn empirical_joint_with_cap(
    data: &Dataset,
    feature_subset: &[String],
    cap: usize,
) -> Result<JointDistribution, DataError> {
    let schema = data.schema();
    let mut idx = Vec::with_capacity(feature_subset.len());
    for name in feature_subset {
        let i = schema.index_of(name).ok_or_else(|| DataError::MissingColumn(name.clone()))?;
        let col = &schema.columns()[i];
        if col.role != ColumnRole::Feature {
            return Err(DataError::NotAFeature(name.clone()));
        }
        if col.kind == ColumnKind::Numeric {
            return Err(DataError::NumericColumnSelected(name.clone()));
        }
        idx.push(i);
    }
    let mut domains: Vec<Vec<String>> = idx
        .iter()
        .map(|&i| {
            let mut d: Vec<String> =
                data.rows().iter().filter_map(|r| r[i].as_cat().map(str::to_string)).collect();
            d.sort();
            d.dedup();
            d
        })
        .collect();
    let mut size: usize = 1;
    for d in &domains {
        size = size.saturating_mul(d.len().max(1));
    }
    if size > cap {
        return Err(DataError::DomainTooLarge { size, cap });
    }
    for d in &mut domains {
        d.shrink_to_fit();
    }
    let labels = data.labels();
    let groups = data.groups();
    let counts = data
        .rows()
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let x = idx.iter().map(|&i| row[i].to_string()).collect();
            (x, labels[r], groups[r], 1)
        })
        .collect();
    Ok(JointDistribution::from_counts(feature_subset.to_vec(), domains, counts))
}
