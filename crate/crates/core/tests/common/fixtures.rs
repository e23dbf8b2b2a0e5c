//! Small hand-made datasets.

use repairlab::data::{Schema, Value};
use repairlab::Dataset;

/// Ten rows, two numeric features, one categorical, binary z and y.
pub fn ten_rows() -> Dataset {
    let schema = Schema::parse(
        "a numeric feature\nb numeric feature\nc categorical feature\nz categorical protected\ny categorical label\n\
         favorable 1\nprivileged p\nunfavorable 0\nunprivileged u\n",
    )
    .unwrap();
    let raw = [
        (0.3, 1.2, "r", "p", "1"),
        (-1.1, 0.4, "g", "u", "0"),
        (2.0, -0.7, "r", "p", "1"),
        (0.5, 0.5, "b", "u", "1"),
        (-0.2, -1.5, "g", "p", "0"),
        (1.4, 2.2, "b", "u", "0"),
        (-2.3, 0.1, "r", "u", "0"),
        (0.9, -0.3, "g", "p", "1"),
        (0.0, 1.0, "b", "p", "0"),
        (1.7, 0.8, "r", "u", "1"),
    ];
    let rows = raw
        .iter()
        .map(|&(a, b, c, z, y)| vec![Value::Num(a), Value::Num(b), Value::cat(c), Value::cat(z), Value::cat(y)])
        .collect();
    Dataset::new(schema, rows).unwrap()
}

/// Encoded ten-row design matrix, targets and groups.
pub fn ten_row_arrays() -> (Vec<Vec<f64>>, Vec<f64>, Vec<bool>) {
    let d = ten_rows();
    let enc = repairlab::classifiers::Encoder::fit(&d, false);
    let (x, _) = enc.encode(&d).unwrap();
    let y = d.labels().into_iter().map(|v| if v { 1.0 } else { 0.0 }).collect();
    (x, y, d.groups())
}
