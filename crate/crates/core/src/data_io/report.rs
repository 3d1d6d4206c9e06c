use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection::DetectionReport;
use crate::error::{Error, Result};
use crate::regression::ResidualVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierEntry {
    pub row: usize,
    pub value: f64,
    pub residual: f64,
}

/// Serialized form of a [`DetectionReport`].
///
/// Floats are written in their shortest round-trip decimal form, so parsing
/// a document gives back bit-identical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub p_value: f64,
    pub alpha: f64,
    pub nsim: usize,
    pub seed: u64,
    pub threshold: f64,
    pub t_obs: f64,
    pub df: usize,
    pub residuals: Vec<f64>,
    pub values: Vec<f64>,
    pub rows: Vec<usize>,
    pub outliers: Vec<OutlierEntry>,
    pub dropped_rows: Vec<usize>,
}

impl From<&DetectionReport> for ReportDocument {
    fn from(r: &DetectionReport) -> Self {
        ReportDocument {
            p_value: r.p_value,
            alpha: r.alpha,
            nsim: r.nsim,
            seed: r.seed,
            threshold: r.threshold,
            t_obs: r.t_obs,
            df: r.residuals.df,
            residuals: r.residuals.values.clone(),
            values: r.response.clone(),
            rows: r.row_map.clone(),
            outliers: r
                .outlier_indices
                .iter()
                .map(|&i| OutlierEntry {
                    row: r.row_map[i],
                    value: r.response[i],
                    residual: r.residuals.values[i],
                })
                .collect(),
            dropped_rows: r.dropped_rows.clone(),
        }
    }
}

impl ReportDocument {
    pub fn into_report(self) -> Result<DetectionReport> {
        let n = self.residuals.len();
        if self.values.len() != n || self.rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.values.len().min(self.rows.len()),
                context: "report columns".into(),
            });
        }
        let outlier_indices = self
            .outliers
            .iter()
            .map(|o| {
                self.rows.iter().position(|&r| r == o.row).ok_or_else(|| {
                    Error::InvalidConfig(format!("outlier row {} not in rows", o.row))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DetectionReport {
            outlier_values: outlier_indices.iter().map(|&i| self.values[i]).collect(),
            outlier_indices,
            residuals: ResidualVector::new(self.residuals, self.df),
            response: self.values,
            t_obs: self.t_obs,
            threshold: self.threshold,
            alpha: self.alpha,
            p_value: self.p_value,
            seed: self.seed,
            nsim: self.nsim,
            row_map: self.rows,
            dropped_rows: self.dropped_rows,
        })
    }
}

pub fn report_to_json(report: &DetectionReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ReportDocument::from(report))?)
}

pub fn report_from_json(json: &str) -> Result<DetectionReport> {
    serde_json::from_str::<ReportDocument>(json)?.into_report()
}

/// One line per observation: `row,value,residual,outlier`.
pub fn report_to_csv(report: &DetectionReport) -> String {
    let mut out = String::from("row,value,residual,outlier\n");
    for (i, e) in report.residuals.values.iter().enumerate() {
        let flag = if report.is_outlier(i) {
            "TRUE"
        } else {
            "FALSE"
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            report.row_map[i], report.response[i], e, flag
        ));
    }
    out
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub fn write_report(report: &DetectionReport, format: ReportFormat, path: &Path) -> Result<()> {
    let body = match format {
        ReportFormat::Json => report_to_json(report)?,
        ReportFormat::Csv => report_to_csv(report),
    };
    write_bytes(path, body.as_bytes())
}
