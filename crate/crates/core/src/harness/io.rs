//! Plain-text matrices and vectors, CSV tables and JSON sidecars.
//!
//! Matrix files start with a line `M N` followed by `M * N` row-major values
//! separated by whitespace. Vector files use the same layout with `N = 1`.

use crate::error::{Error, Result};
use crate::gamp::SensingOperator;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

fn parse_table(text: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Io(format!("missing {what} in header")))?
            .parse::<usize>()
            .map_err(|e| Error::Io(format!("bad {what} in header: {e}")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let data = tokens
        .map(|t| t.parse::<f64>().map_err(|e| Error::Io(format!("bad value '{t}': {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!("header says {rows}x{cols}, found {} values", data.len())));
    }
    Ok((rows, cols, data))
}

fn format_table(rows: usize, cols: usize, data: &[f64]) -> String {
    let mut s = format!("{rows} {cols}\n");
    for row in data.chunks(cols.max(1)) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<SensingOperator> {
    let (m, n, data) = parse_table(text)?;
    SensingOperator::new(m, n, data)
}

pub fn format_matrix(a: &SensingOperator) -> String {
    format_table(a.rows(), a.cols(), a.data())
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let (_, cols, data) = parse_table(text)?;
    if cols != 1 {
        return Err(Error::DimensionMismatch(format!("vector file has {cols} columns")));
    }
    Ok(data)
}

pub fn format_vector(v: &[f64]) -> String {
    format_table(v.len(), 1, v)
}

pub fn read_matrix(path: &Path) -> Result<SensingOperator> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, a: &SensingOperator) -> Result<()> {
    Ok(std::fs::write(path, format_matrix(a))?)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    Ok(std::fs::write(path, format_vector(v))?)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// CSV with a header row taken from the record's field names.
pub fn write_csv<R: Serialize, W: Write>(records: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: DeserializeOwned, Rd: Read>(input: Rd) -> Result<Vec<R>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(csv_err)).collect()
}

/// Pretty JSON next to a result table.
pub fn write_sidecar<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    Ok(std::fs::write(path, text + "\n")?)
}
