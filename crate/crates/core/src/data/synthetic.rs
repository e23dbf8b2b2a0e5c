use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Column, ColumnKind, ColumnRole, DataError, Dataset, Schema, Value};
use crate::rng::{keyed_rng, streams};

pub const GROUP_COLUMN: &str = "group";
pub const PROXY_COLUMN: &str = "proxy";
pub const LABEL_COLUMN: &str = "label";

/// Parameters of the biased-data generator.
///
/// Columns: `group` (protected, `a` privileged / `b`), `proxy` (copies the
/// group with probability `proxy_correlation`, otherwise the other group),
/// `noise_0..` (uniform over `noise_levels` levels), optional numeric
/// `score_0..` (uniform on `[0, 1)`, shifted up by 0.5 for favorable rows)
/// and `label` (`1` favorable / `0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_rows: usize,
    pub base_positive_rate: f64,
    /// Drop in favorable-label probability for the unprivileged group.
    pub bias_strength: f64,
    pub proxy_correlation: f64,
    pub noise_features: usize,
    #[serde(default = "default_noise_levels")]
    pub noise_levels: usize,
    #[serde(default)]
    pub numeric_features: usize,
    pub seed: u64,
}

fn default_noise_levels() -> usize {
    3
}

impl GeneratorConfig {
    /// The fixed benchmark dataset used across the test suites.
    pub fn standard() -> Self {
        Self {
            n_rows: 1000,
            base_positive_rate: 0.6,
            bias_strength: 0.3,
            proxy_correlation: 0.8,
            noise_features: 2,
            noise_levels: 3,
            numeric_features: 0,
            seed: 7,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(DataError::InvalidConfig(format!("{name} = {v} is not in [0, 1]")))
            }
        };
        if self.n_rows < 2 {
            return Err(DataError::InvalidConfig("n_rows must be at least 2".into()));
        }
        prob("base_positive_rate", self.base_positive_rate)?;
        prob("bias_strength", self.bias_strength)?;
        prob("proxy_correlation", self.proxy_correlation)?;
        prob("base_positive_rate - bias_strength", self.base_positive_rate - self.bias_strength)?;
        if self.noise_features > 0 && self.noise_levels == 0 {
            return Err(DataError::InvalidConfig("noise_levels must be positive".into()));
        }
        Ok(())
    }

    pub fn schema(&self) -> Schema {
        let mut cols = vec![
            Column::new(GROUP_COLUMN, ColumnKind::Categorical, ColumnRole::Protected),
            Column::new(PROXY_COLUMN, ColumnKind::Categorical, ColumnRole::Feature),
        ];
        for i in 0..self.noise_features {
            cols.push(Column::new(format!("noise_{i}"), ColumnKind::Categorical, ColumnRole::Feature));
        }
        for i in 0..self.numeric_features {
            cols.push(Column::new(format!("score_{i}"), ColumnKind::Numeric, ColumnRole::Feature));
        }
        cols.push(Column::new(LABEL_COLUMN, ColumnKind::Categorical, ColumnRole::Label));
        let mut schema = Schema::new(cols, "1", "a").expect("generator schema is valid");
        schema.fill_complements(Some("0".into()), Some("b".into()));
        schema
    }
}

/// Draws a dataset whose labels depend on the protected group and whose
/// `proxy` feature leaks the group. Same config, same bytes.
pub fn generate_synthetic(config: &GeneratorConfig) -> Result<Dataset, DataError> {
    config.validate()?;
    let schema = config.schema();
    let rows = (0..config.n_rows)
        .map(|i| {
            let mut rng = keyed_rng(config.seed, streams::GENERATE, i as u64);
            let privileged = rng.gen::<f64>() < 0.5;
            let proxy_same = rng.gen::<f64>() < config.proxy_correlation;
            let proxy_priv = if proxy_same { privileged } else { !privileged };
            let p_pos = if privileged {
                config.base_positive_rate
            } else {
                config.base_positive_rate - config.bias_strength
            };
            let favorable = rng.gen::<f64>() < p_pos;
            let mut row = Vec::with_capacity(config.noise_features + 3);
            row.push(schema.group_value(privileged));
            row.push(schema.group_value(proxy_priv));
            for _ in 0..config.noise_features {
                row.push(Value::Cat(rng.gen_range(0..config.noise_levels).to_string()));
            }
            for _ in 0..config.numeric_features {
                let shift = if favorable { 0.5 } else { 0.0 };
                row.push(Value::Num(rng.gen::<f64>() + shift));
            }
            row.push(schema.label_value(favorable));
            row
        })
        .collect();
    Dataset::new(schema, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::write_csv_to;

    #[test]
    fn deterministic_bytes() {
        let cfg = GeneratorConfig::standard();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv_to(&mut a, &generate_synthetic(&cfg).unwrap()).unwrap();
        write_csv_to(&mut b, &generate_synthetic(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_proxy_correlation_copies_group() {
        let cfg = GeneratorConfig { proxy_correlation: 1.0, n_rows: 500, ..GeneratorConfig::standard() };
        let ds = generate_synthetic(&cfg).unwrap();
        for r in ds.rows() {
            assert_eq!(r[0], r[1]);
        }
    }

    #[test]
    fn unbiased_generator_rates_converge() {
        let cfg = GeneratorConfig { n_rows: 100_000, bias_strength: 0.0, ..GeneratorConfig::standard() };
        let ds = generate_synthetic(&cfg).unwrap();
        let (mut n, mut pos) = ([0usize; 2], [0usize; 2]);
        for (y, g) in ds.labels().into_iter().zip(ds.groups()) {
            n[g as usize] += 1;
            pos[g as usize] += y as usize;
        }
        let diff = pos[0] as f64 / n[0] as f64 - pos[1] as f64 / n[1] as f64;
        assert!(diff.abs() < 0.01, "diff {diff}");
    }

    #[test]
    fn numeric_scores_follow_labels() {
        let cfg = GeneratorConfig { numeric_features: 1, n_rows: 400, ..GeneratorConfig::standard() };
        let ds = generate_synthetic(&cfg).unwrap();
        let i = ds.schema().index_of("score_0").unwrap();
        for (r, y) in ds.rows().iter().zip(ds.labels()) {
            let v = r[i].as_num().unwrap();
            assert!(if y { (0.5..1.5).contains(&v) } else { (0.0..1.0).contains(&v) });
        }
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = GeneratorConfig::standard();
        cfg.n_rows = 1;
        assert!(generate_synthetic(&cfg).is_err());
        let cfg = GeneratorConfig { bias_strength: 0.7, ..GeneratorConfig::standard() };
        assert!(matches!(generate_synthetic(&cfg), Err(DataError::InvalidConfig(_))));
        let cfg = GeneratorConfig { proxy_correlation: 1.5, ..GeneratorConfig::standard() };
        assert!(generate_synthetic(&cfg).is_err());
    }
}
