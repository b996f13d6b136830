//! CSV and JSON file formats.
//!
//! CSV dialect: comma separated, a header row of column names, one row per
//! observation, plain decimal numbers (no quoting needed). Matrices are
//! written with 17 significant digits so they read back bit for bit.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::data::{DesignMatrix, ResponseVector};
use crate::error::{Error, Result};

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("row {row}, column {col}: cannot parse {cell:?} as a number")))?;
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!(
            "row {row}, column {col}: non-finite value"
        )));
    }
    Ok(v)
}

/// Header names and row-major values of a numeric CSV table.
pub fn read_table<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().all(|n| n.is_empty()) {
        return Err(Error::InvalidInput("missing header row".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != names.len() {
            return Err(Error::DimensionMismatch(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                rec.len(),
                names.len()
            )));
        }
        rows.push(
            rec.iter()
                .enumerate()
                .map(|(j, c)| parse_cell(c, i + 1, j + 1))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok((names, rows))
}

fn to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn read_design<R: Read>(reader: R) -> Result<DesignMatrix> {
    let (names, rows) = read_table(reader)?;
    DesignMatrix::new(to_matrix(&rows, names.len()), names)
}

pub fn read_design_file(path: &Path) -> Result<DesignMatrix> {
    read_design(File::open(path)?)
}

/// A single-column response table.
pub fn read_response<R: Read>(reader: R) -> Result<ResponseVector> {
    let (names, rows) = read_table(reader)?;
    if names.len() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "response file must have exactly one column, found {}",
            names.len()
        )));
    }
    ResponseVector::from_vec(rows.into_iter().map(|r| r[0]).collect())
}

pub fn read_response_file(path: &Path) -> Result<ResponseVector> {
    read_response(File::open(path)?)
}

/// A square matrix; the header row is optional (detected when the first
/// row does not parse as numbers).
pub fn read_square_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: Result<Vec<f64>> = rec
            .iter()
            .enumerate()
            .map(|(j, c)| parse_cell(c, i + 1, j + 1))
            .collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(e),
        }
    }
    let p = rows.len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(Error::DimensionMismatch(format!(
            "matrix file is not square ({} rows, row lengths {:?})",
            p,
            rows.iter().map(Vec::len).collect::<std::collections::BTreeSet<_>>()
        )));
    }
    Ok(to_matrix(&rows, p))
}

pub fn read_square_matrix_file(path: &Path) -> Result<DMatrix<f64>> {
    read_square_matrix(File::open(path)?)
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix<W: Write>(writer: W, names: &[String], values: &DMatrix<f64>) -> Result<()> {
    if names.len() != values.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} columns",
            names.len(),
            values.ncols()
        )));
    }
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    wtr.write_record(names)?;
    for row in values.row_iter() {
        wtr.write_record(row.iter().map(|v| format_value(*v)))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_matrix_file(path: &Path, names: &[String], values: &DMatrix<f64>) -> Result<()> {
    write_matrix(BufWriter::new(File::create(path)?), names, values)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
