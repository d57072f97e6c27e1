//! CSV ingestion and the on-disk artifact formats.
//!
//! Input files hold one observation per row, either as a single value column
//! or as `date,value`. A header row is optional; the first row counts as a
//! header when none of its fields parses as a number. Row numbers in errors
//! are 1-based file lines.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{SeriesError, TimeSeries};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("input file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("row {row}: {message}")]
    ParseError { row: u64, message: String },
    #[error("row {row}: missing value")]
    MissingValue { row: u64 },
    #[error("row {row}: value is not finite")]
    NonFiniteValue { row: u64 },
    #[error("no column named {0:?}")]
    MissingColumn(String),
    #[error("input contains no observations")]
    EmptySeries,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl IoError {
    /// True for failures of the filesystem itself rather than of the content.
    pub fn is_system(&self) -> bool {
        matches!(self, IoError::Io { .. })
    }

    fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            IoError::MissingFile(path.to_path_buf())
        } else {
            IoError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }

    fn csv(path: &Path, err: csv::Error) -> Self {
        let row = err.position().map_or(0, |p| p.line());
        match err.into_kind() {
            csv::ErrorKind::Io(source) => IoError::io(path, source),
            other => IoError::ParseError {
                row,
                message: format!("{other:?}"),
            },
        }
    }
}

pub fn load_series(path: &Path, column: Option<&str>) -> Result<TimeSeries, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    parse_series(file, column).map_err(|e| match e {
        IoError::Io { source, .. } => IoError::io(path, source),
        other => other,
    })
}

/// Parses series CSV from any reader; see the module docs for the format.
pub fn parse_series<R: Read>(reader: R, column: Option<&str>) -> Result<TimeSeries, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IoError::csv(Path::new(""), e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(IoError::EmptySeries);
    }

    let has_header = records[0].1.iter().all(|f| f.parse::<f64>().is_err());
    let header = has_header.then(|| records.remove(0).1);
    let width = header
        .as_ref()
        .map_or_else(|| records.first().map_or(1, |r| r.1.len()), |h| h.len());

    let find = |name: &str| {
        header
            .as_ref()
            .and_then(|h| h.iter().position(|f| f.eq_ignore_ascii_case(name)))
    };
    let value_col = match column {
        Some(name) => find(name).ok_or_else(|| IoError::MissingColumn(name.to_string()))?,
        None => find("value").unwrap_or(width - 1),
    };
    let label_col = find("date").or((width > 1 && value_col != 0).then_some(0));

    if records.is_empty() {
        return Err(IoError::EmptySeries);
    }
    let mut values = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (row, rec) in &records {
        let row = *row;
        let field = rec.get(value_col).unwrap_or("");
        if field.is_empty() {
            return Err(IoError::MissingValue { row });
        }
        let v: f64 = field.parse().map_err(|_| IoError::ParseError {
            row,
            message: format!("{field:?} is not a number"),
        })?;
        if !v.is_finite() {
            return Err(IoError::NonFiniteValue { row });
        }
        values.push(v);
        if let Some(c) = label_col {
            labels.push(rec.get(c).unwrap_or("").to_string());
        }
    }
    let series = match label_col {
        Some(_) => TimeSeries::with_labels(values, labels)?,
        None => TimeSeries::new(values)?,
    };
    Ok(series)
}

/// Writes `date,value` (or `value` when unlabelled). Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_series(path: &Path, series: &TimeSeries) -> Result<(), IoError> {
    let mut out = String::new();
    match series.labels() {
        Some(labels) => {
            out.push_str("date,value\n");
            for (l, v) in labels.iter().zip(series.values()) {
                out.push_str(&format!("{l},{v}\n"));
            }
        }
        None => {
            out.push_str("value\n");
            for v in series.values() {
                out.push_str(&format!("{v}\n"));
            }
        }
    }
    write_bytes(path, out.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let mut f = File::create(path).map_err(|e| IoError::io(path, e))?;
    f.write_all(bytes).map_err(|e| IoError::io(path, e))
}

/// Serializes `rows` under an explicit header, so empty tables still carry one.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let err = |e: csv::Error| IoError::csv(path, e);
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| IoError::io(path, e.into_error()))?;
    write_bytes(path, &bytes)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| IoError::csv(path, e))?;
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| IoError::csv(path, e))
}

/// One row of an intervals table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRow {
    pub index: usize,
    pub date: String,
    pub actual: f64,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

pub const INTERVAL_HEADER: [&str; 6] = ["index", "date", "actual", "point", "lower", "upper"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub f1: f64,
    pub f2: f64,
}

pub const FRONT_HEADER: [&str; 2] = ["f1", "f2"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EafRow {
    pub f1: f64,
    pub f2: f64,
    pub level: usize,
}

pub const EAF_HEADER: [&str; 3] = ["f1", "f2", "level"];

pub const TRACE_HEADER: [&str; 4] = ["generation", "front0_size", "best_f1", "best_f2"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub k: usize,
    pub divergence: f64,
}

pub const DIVERGENCE_HEADER: [&str; 2] = ["k", "divergence"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaoRow {
    pub d: usize,
    pub e1: f64,
    pub e2: f64,
}

pub const CAO_HEADER: [&str; 3] = ["d", "e1", "e2"];
