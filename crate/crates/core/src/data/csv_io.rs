//! CSV ingestion and serialization.
//!
//! RFC-4180-style files, UTF-8, `.` decimal separator. The header row is
//! optional on read (absent headers name columns `x0`, `x1`, ...); writes
//! always emit a header. Values are written in the shortest decimal form
//! that parses back to the identical `f64`, so a write/read round trip is
//! lossless.

use super::{Column, Dataset};
use crate::error::{Error, Result};
use std::path::Path;

/// What to do with a cell that does not parse as a finite number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    /// Fail the load, naming the offending cell.
    Reject,
    /// Drop the whole row containing the cell.
    DropRow,
}

/// Options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Column to designate as the target, by name.
    pub target: Option<String>,
    pub on_missing: MissingPolicy,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: true,
            target: None,
            on_missing: MissingPolicy::Reject,
        }
    }
}

/// Load a CSV file into a [`Dataset`]. Row order is preserved; rows with
/// unparseable or non-finite cells are rejected or dropped per
/// `options.on_missing`.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => io_err(source),
            other => Error::Csv(format!("{other:?}")),
        })?;

    let mut names: Vec<String> = Vec::new();
    if options.has_header {
        let headers = reader
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .clone();
        for h in headers.iter() {
            let name = h.trim().to_string();
            if name.is_empty() {
                return Err(Error::invalid("empty column name in header"));
            }
            if names.contains(&name) {
                return Err(Error::DuplicateColumn(name));
            }
            names.push(name);
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if names.is_empty() {
            names = (0..record.len()).map(|i| format!("x{i}")).collect();
        }
        if record.len() != names.len() {
            return Err(Error::Csv(format!(
                "row {line} has {} fields, expected {}",
                record.len(),
                names.len()
            )));
        }
        let mut row = Vec::with_capacity(record.len());
        let mut missing: Option<usize> = None;
        for (j, cell) in record.iter().enumerate() {
            match cell.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    missing = Some(j);
                    break;
                }
            }
        }
        match missing {
            None => rows.push(row),
            Some(j) => match options.on_missing {
                MissingPolicy::Reject => {
                    return Err(Error::Csv(format!(
                        "non-numeric cell {:?} in column {:?}, data row {line}",
                        record.get(j).unwrap_or(""),
                        names[j],
                    )));
                }
                MissingPolicy::DropRow => {}
            },
        }
    }

    if rows.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no usable rows in {}",
            path.display()
        )));
    }
    let columns = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            (
                name.clone(),
                rows.iter().map(|r| r[j]).collect::<Vec<f64>>(),
            )
        })
        .collect();
    Dataset::new(columns, options.target.as_deref())
}

/// Write `ds` (all columns, target included) as a headered CSV file.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Csv(e.to_string()))?;
    let columns: &[Column] = ds.columns();
    writer
        .write_record(columns.iter().map(|c| c.name.as_str()))
        .map_err(|e| Error::Csv(e.to_string()))?;
    for r in 0..ds.n_rows() {
        writer
            .write_record(columns.iter().map(|c| format!("{}", c.values[r])))
            .map_err(|e| Error::Csv(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(())
}
