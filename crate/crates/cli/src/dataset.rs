//! CSV ingestion: comma separated, '.' decimals, optional header row.

use std::path::Path;

use anyhow::{Context, Result};

use crate::exit::{input_error, Exit};

#[derive(Debug, Clone)]
pub struct Dataset {
    pub header: Option<Vec<String>>,
    /// Column-major values.
    pub columns: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// A first row with no numeric cell at all is taken as a header.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input_error(format!("cannot open {}: {e}", path.display())))?;

    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let record = record
            .with_context(|| format!("reading {}", path.display()))
            .map_err(|e| Exit::error(2, format!("{e:#}")))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if index == 0 && record.iter().all(|c| parse_cell(c).is_none()) {
            header = Some(record.iter().map(str::to_string).collect());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(input_error(format!(
                "row {line}: expected {expected} columns, found {}",
                record.len()
            )));
        }
        let mut values = Vec::with_capacity(expected);
        for (col, cell) in record.iter().enumerate() {
            let value = parse_cell(cell).ok_or_else(|| {
                input_error(format!(
                    "row {line}, column {}: cannot parse {cell:?} as a finite number",
                    col + 1
                ))
            })?;
            values.push(value);
        }
        rows.push(values);
    }

    if rows.is_empty() {
        return Err(input_error(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    let width = rows[0].len();
    let columns = (0..width)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    Ok(Dataset { header, columns })
}
