//! Numeric CSV ingestion.

use std::fs::File;
use std::path::Path;

use cqreg::Dataset;
use nalgebra::{DMatrix, DVector};

use crate::CliError;

/// Response column selector: a header name, or a zero-based index when no
/// header carries that exact name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseColumn(pub String);

impl ResponseColumn {
    fn resolve(&self, headers: &[String]) -> Result<usize, CliError> {
        if let Some(j) = headers.iter().position(|h| h == &self.0) {
            return Ok(j);
        }
        match self.0.parse::<usize>() {
            Ok(j) if j < headers.len() => Ok(j),
            Ok(j) => Err(CliError::Input(format!(
                "response index {j} is out of range for {} columns",
                headers.len()
            ))),
            Err(_) => Err(CliError::Input(format!("response column `{}` not found in header", self.0))),
        }
    }
}

/// A parsed table: the dataset plus the covariate names in column order.
#[derive(Debug, Clone)]
pub struct Table {
    pub data: Dataset,
    pub covariates: Vec<String>,
    pub response: String,
}

/// Reads a rectangular numeric CSV with one header row. Locations in errors
/// are 1-based file lines and 1-based columns.
pub fn read_csv(path: &Path, response: &ResponseColumn) -> Result<Table, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("cannot read header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::Input("header row is empty".into()));
    }
    let target = response.resolve(&headers)?;
    let width = headers.len();

    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(CliError::Input(format!(
                "line {line}: expected {width} fields, found {}",
                record.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            let value = parse_cell(cell).map_err(|why| {
                CliError::Input(format!("line {line}, column {} (`{}`): {why}", j + 1, headers[j]))
            })?;
            if j == target {
                ys.push(value);
            } else {
                xs.push(value);
            }
        }
    }
    if ys.is_empty() {
        return Err(CliError::Input("no data rows".into()));
    }
    let n = ys.len();
    let p = width - 1;
    let x = DMatrix::from_row_slice(n, p, &xs);
    let data = Dataset::new(x, DVector::from_vec(ys)).map_err(|e| CliError::Input(e.to_string()))?;
    let covariates = headers.iter().enumerate().filter(|(j, _)| *j != target).map(|(_, h)| h.clone()).collect();
    Ok(Table { data, covariates, response: headers[target].clone() })
}

fn parse_cell(cell: &str) -> Result<f64, String> {
    let s = cell.trim();
    if s.is_empty() {
        return Err("empty cell".into());
    }
    // Rust's float grammar is period-only, but it also accepts inf/nan spellings.
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("`{s}` is not a finite number")),
        Err(_) => Err(format!("`{s}` is not a number")),
    }
}
