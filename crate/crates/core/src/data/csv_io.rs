use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{ColumnKind, DataError, Dataset, Record, Schema, Value};

/// Provenance column written when a dataset holds synthetic rows.
pub const SYNTHETIC_COLUMN: &str = "__synthetic";

/// Loads a headed CSV file. Row ids are the 0-based data line index.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path)
        .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(DataError::EmptyFile);
    }
    let mut position: HashMap<&str, usize> = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if position.insert(h, i).is_some() {
            return Err(DataError::DuplicateHeader(h.to_string()));
        }
    }
    let mut source_idx = Vec::with_capacity(schema.columns().len());
    for col in schema.columns() {
        match position.get(col.name.as_str()) {
            Some(&i) => source_idx.push(i),
            None => return Err(DataError::MissingColumn(col.name.clone())),
        }
    }
    let synthetic_idx = position.get(SYNTHETIC_COLUMN).copied();

    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut out: Record = Vec::with_capacity(source_idx.len());
        for (col, &src) in schema.columns().iter().zip(&source_idx) {
            let raw = rec.get(src).unwrap_or("");
            if raw.is_empty() {
                return Err(DataError::MissingValue { row: row_no, column: col.name.clone() });
            }
            let value = match col.kind {
                ColumnKind::Numeric => match raw.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Value::Num(v),
                    _ => {
                        return Err(DataError::TypeMismatch {
                            row: row_no,
                            column: col.name.clone(),
                            value: raw.to_string(),
                        })
                    }
                },
                ColumnKind::Categorical => Value::Cat(raw.to_string()),
            };
            out.push(value);
        }
        let flag = match synthetic_idx {
            Some(i) => match rec.get(i).unwrap_or("") {
                "0" => false,
                "1" => true,
                other => {
                    return Err(DataError::TypeMismatch {
                        row: row_no,
                        column: SYNTHETIC_COLUMN.into(),
                        value: other.to_string(),
                    })
                }
            },
            None => false,
        };
        rows.push(out);
        flags.push(flag);
    }
    if rows.is_empty() {
        return Err(DataError::EmptyFile);
    }
    let ids = (0..rows.len() as u64).collect();
    Dataset::from_parts(schema.clone(), rows, ids, flags)
}

pub fn write_csv(path: &Path, data: &Dataset) -> Result<(), DataError> {
    let file = std::fs::File::create(path)
        .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    write_csv_to(file, data)
}

/// Writes columns in schema order. Adds [`SYNTHETIC_COLUMN`] when any row is
/// synthetic.
pub fn write_csv_to<W: Write>(writer: W, data: &Dataset) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let with_flag = data.synthetic_flags().iter().any(|&f| f);
    let mut header: Vec<&str> = data.schema().columns().iter().map(|c| c.name.as_str()).collect();
    if with_flag {
        header.push(SYNTHETIC_COLUMN);
    }
    w.write_record(&header)?;
    for (i, row) in data.rows().iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if with_flag {
            fields.push(if data.is_synthetic(i) { "1" } else { "0" }.to_string());
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(|source| DataError::Io { path: "<csv writer>".into(), source })?;
    Ok(())
}
