use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// A per-column transformation requested on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformOp {
    /// Replace the column by its natural logarithm.
    Log,
    /// Add the column raised to this power alongside the original.
    Power(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub column: String,
    pub op: TransformOp,
}

impl FromStr for Transform {
    type Err = Error;

    /// `NAME:log`, `NAME:square` or `NAME:powN` with `N ≥ 2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidTransform(s.to_string());
        let (column, op) = s.trim().rsplit_once(':').ok_or_else(bad)?;
        if column.is_empty() {
            return Err(bad());
        }
        let op = match op {
            "log" => TransformOp::Log,
            "square" | "sq" => TransformOp::Power(2),
            other => {
                let p: u32 = other
                    .strip_prefix("pow")
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(bad)?;
                if p < 2 {
                    return Err(bad());
                }
                TransformOp::Power(p)
            }
        };
        Ok(Transform {
            column: column.to_string(),
            op,
        })
    }
}

/// Parses a comma-separated list of transforms, e.g. `x:square,y:log`.
pub fn parse_transforms(spec: &str) -> Result<Vec<Transform>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Complete cases of the requested columns, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub response_name: String,
    pub response: Vec<f64>,
    pub predictors: Vec<(String, Vec<f64>)>,
    /// 1-based data-row number (header excluded) of each retained row.
    pub rows: Vec<usize>,
    /// Data rows removed because a used cell was missing or non-finite.
    pub dropped_rows: Vec<usize>,
    pub source_path: PathBuf,
}

impl Dataset {
    pub fn nrows(&self) -> usize {
        self.response.len()
    }

    pub fn predictor_columns(&self) -> Vec<&[f64]> {
        self.predictors.iter().map(|(_, c)| c.as_slice()).collect()
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "na" | "N/A")
}

/// Reads the response and predictor columns from a headed CSV file.
///
/// A row with a missing (`NA` or empty) or non-finite value in any used
/// column, before or after transforms, is dropped and recorded. Power
/// transforms insert a new predictor column `name^p` right after `name`.
pub fn load_csv(
    path: &Path,
    response_col: &str,
    predictor_cols: &[String],
    transforms: &[Transform],
) -> Result<Dataset> {
    for t in transforms {
        let known = t.column == response_col || predictor_cols.contains(&t.column);
        let power_on_response = t.column == response_col && matches!(t.op, TransformOp::Power(_));
        if !known || power_on_response {
            return Err(Error::InvalidTransform(format!("{}:{:?}", t.column, t.op)));
        }
    }

    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers()?.clone();
    let locate = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let response_idx = locate(response_col)?;
    let predictor_idx = predictor_cols
        .iter()
        .map(|c| locate(c))
        .collect::<Result<Vec<_>>>()?;

    let logged = |name: &str| {
        transforms
            .iter()
            .any(|t| t.column == name && t.op == TransformOp::Log)
    };
    // output predictor layout: (source predictor, power)
    let mut layout: Vec<(usize, u32)> = Vec::new();
    let mut names = Vec::new();
    for (p, name) in predictor_cols.iter().enumerate() {
        layout.push((p, 1));
        names.push(name.clone());
        for t in transforms.iter().filter(|t| &t.column == name) {
            if let TransformOp::Power(k) = t.op {
                layout.push((p, k));
                names.push(format!("{name}^{k}"));
            }
        }
    }

    let mut response = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); layout.len()];
    let mut rows = Vec::new();
    let mut dropped_rows = Vec::new();

    let parse =
        |record: &csv::StringRecord, row: usize, idx: usize, name: &str| -> Result<Option<f64>> {
            let cell = record.get(idx).unwrap_or("");
            if is_missing(cell) {
                return Ok(None);
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                message: format!("`{cell}` is not a number"),
            })?;
            let v = if logged(name) { v.ln() } else { v };
            Ok(v.is_finite().then_some(v))
        };

    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let y = parse(&record, row, response_idx, response_col)?;
        let xs = predictor_idx
            .iter()
            .zip(predictor_cols)
            .map(|(&idx, name)| parse(&record, row, idx, name))
            .collect::<Result<Vec<_>>>()?;
        let values: Option<Vec<f64>> = layout
            .iter()
            .map(|&(p, k)| xs[p].map(|x| x.powi(k as i32)).filter(|v| v.is_finite()))
            .collect();
        match (y, values) {
            (Some(y), Some(values)) => {
                response.push(y);
                for (col, v) in columns.iter_mut().zip(values) {
                    col.push(v);
                }
                rows.push(row);
            }
            _ => dropped_rows.push(row),
        }
    }

    let required = layout.len() + 1 + 2;
    if response.len() < required {
        return Err(Error::EmptyAfterDrop {
            remaining: response.len(),
            required,
        });
    }

    Ok(Dataset {
        response_name: response_col.to_string(),
        response,
        predictors: names.into_iter().zip(columns).collect(),
        rows,
        dropped_rows,
        source_path: path.to_path_buf(),
    })
}
