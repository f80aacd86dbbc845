use std::path::PathBuf;

use csv::{ReaderBuilder, StringRecord, Trim};
use threshreg::Sample;

use crate::error::CliError;

/// Where the response, covariates and threshold variable live in a CSV file.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub y_column: String,
    pub x_columns: Vec<String>,
    pub q_column: String,
    /// Without a header, columns are named by their zero-based position.
    pub has_header: bool,
}

#[derive(Debug)]
pub struct Loaded {
    pub sample: Sample,
    /// Rows dropped for a missing or non-numeric cell in a selected column.
    pub dropped_rows: usize,
}

impl DatasetSpec {
    fn validate(&self) -> Result<(), CliError> {
        if self.x_columns.is_empty() {
            return Err(CliError::Usage("at least one --x column is required".into()));
        }
        let mut names: Vec<&str> = self.x_columns.iter().map(String::as_str).collect();
        names.push(&self.y_column);
        names.push(&self.q_column);
        let mut sorted = names.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::Usage(format!("column '{}' selected more than once", w[0])));
        }
        Ok(())
    }

    fn locate(&self, header: Option<&StringRecord>, name: &str) -> Result<usize, CliError> {
        let missing = || CliError::Data(format!("column '{name}' not found in {}", self.path.display()));
        match header {
            Some(h) => h.iter().position(|c| c == name).ok_or_else(missing),
            None => name.parse::<usize>().map_err(|_| missing()),
        }
    }
}

fn cell(record: &StringRecord, col: usize) -> Option<f64> {
    record.get(col).and_then(|s| s.parse::<f64>().ok()).filter(|v| v.is_finite())
}

pub fn load_csv(spec: &DatasetSpec) -> Result<Loaded, CliError> {
    spec.validate()?;
    let mut reader = ReaderBuilder::new()
        .has_headers(spec.has_header)
        .trim(Trim::All)
        .flexible(true)
        .from_path(&spec.path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", spec.path.display())))?;
    let header = if spec.has_header {
        Some(reader.headers().map_err(|e| CliError::Data(format!("bad header in {}: {e}", spec.path.display())))?.clone())
    } else {
        None
    };

    let y_col = spec.locate(header.as_ref(), &spec.y_column)?;
    let q_col = spec.locate(header.as_ref(), &spec.q_column)?;
    let x_cols = spec.x_columns.iter().map(|c| spec.locate(header.as_ref(), c)).collect::<Result<Vec<_>, _>>()?;

    let (mut y, mut x, mut q) = (Vec::new(), Vec::new(), Vec::new());
    let mut dropped_rows = 0;
    let mut row = Vec::with_capacity(x_cols.len());
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("cannot read {}: {e}", spec.path.display())))?;
        row.clear();
        row.extend(x_cols.iter().map(|&c| cell(&record, c)));
        match (cell(&record, y_col), cell(&record, q_col)) {
            (Some(yv), Some(qv)) if row.iter().all(Option::is_some) => {
                y.push(yv);
                q.push(qv);
                x.extend(row.iter().flatten());
            }
            _ => dropped_rows += 1,
        }
    }
    if y.is_empty() {
        return Err(CliError::Data(format!("no usable rows in {}", spec.path.display())));
    }
    let sample = Sample::new(y, x, q, x_cols.len()).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(Loaded { sample, dropped_rows })
}
