use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monte_carlo::{validate_alpha, EmpiricalTDistribution};
use crate::regression::{statistic_t, studentized_residuals, FittedModel, ResidualVector};

/// Outcome of testing one fitted model against its tabulated null law.
///
/// Indices are 0-based model coordinates; `row_map[i]` gives the original
/// data row of model observation `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub residuals: ResidualVector,
    pub response: Vec<f64>,
    pub t_obs: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub p_value: f64,
    pub outlier_indices: Vec<usize>,
    pub outlier_values: Vec<f64>,
    pub seed: u64,
    pub nsim: usize,
    pub row_map: Vec<usize>,
    pub dropped_rows: Vec<usize>,
}

impl DetectionReport {
    pub fn has_outliers(&self) -> bool {
        !self.outlier_indices.is_empty()
    }

    /// Original data rows of the flagged observations.
    pub fn outlier_rows(&self) -> Vec<usize> {
        self.outlier_indices
            .iter()
            .map(|&i| self.row_map[i])
            .collect()
    }

    pub fn is_outlier(&self, i: usize) -> bool {
        self.outlier_indices.binary_search(&i).is_ok()
    }

    /// Attaches the original row numbering after listwise deletion.
    pub fn with_rows(mut self, row_map: Vec<usize>, dropped_rows: Vec<usize>) -> Result<Self> {
        if row_map.len() != self.residuals.len() {
            return Err(Error::DimensionMismatch {
                expected: self.residuals.len(),
                actual: row_map.len(),
                context: "row map length".into(),
            });
        }
        self.row_map = row_map;
        self.dropped_rows = dropped_rows;
        Ok(self)
    }
}

/// Flags every observation whose residual exceeds `c_α`, the `1 - α`
/// quantile of the tabulated law of `T`.
///
/// The comparison is strict: a residual exactly at the threshold is not an
/// outlier.
pub fn detect(
    model: &FittedModel,
    dist: &EmpiricalTDistribution,
    alpha: f64,
) -> Result<DetectionReport> {
    let residuals = studentized_residuals(model)?;
    detect_with_residuals(model, &residuals, dist, alpha)
}

/// [`detect`] with residuals computed elsewhere (e.g. by the leave-one-out
/// oracle).
pub fn detect_with_residuals(
    model: &FittedModel,
    residuals: &ResidualVector,
    dist: &EmpiricalTDistribution,
    alpha: f64,
) -> Result<DetectionReport> {
    validate_alpha(alpha)?;
    let fingerprint = model.design().fingerprint();
    if dist.design_fingerprint() != fingerprint {
        return Err(Error::FingerprintMismatch {
            expected: dist.design_fingerprint().to_string(),
            actual: fingerprint.to_string(),
        });
    }
    if residuals.len() != model.response().len() {
        return Err(Error::DimensionMismatch {
            expected: model.response().len(),
            actual: residuals.len(),
            context: "studentized residuals vs response".into(),
        });
    }

    let t_obs = statistic_t(residuals)?;
    let threshold = dist.quantile(alpha);
    let outlier_indices: Vec<usize> = residuals
        .values
        .iter()
        .enumerate()
        .filter(|(_, e)| e.abs() > threshold)
        .map(|(i, _)| i)
        .collect();
    let outlier_values = outlier_indices
        .iter()
        .map(|&i| model.response()[i])
        .collect();

    Ok(DetectionReport {
        residuals: residuals.clone(),
        response: model.response().to_vec(),
        t_obs,
        threshold,
        alpha,
        p_value: dist.p_value(t_obs),
        outlier_indices,
        outlier_values,
        seed: dist.seed(),
        nsim: dist.nsim(),
        row_map: (1..=residuals.len()).collect(),
        dropped_rows: Vec::new(),
    })
}
