use serde::{Deserialize, Serialize};

use super::design::{DesignMatrix, LEVERAGE_TOLERANCE};
use crate::error::{Error, Result};

/// A leave-one-out residual sum of squares at or below this fraction of
/// `Σ y²` is treated as an exact zero.
pub const ZERO_RSS_TOLERANCE: f64 = 1e-24;

/// The deletion identity subtracts from the full RSS, so its rounding error
/// scales with the RSS. A leave-one-out RSS below this fraction of it is
/// cancellation noise.
pub const CANCELLATION_TOLERANCE: f64 = 1e-10;

pub(crate) fn loo_rss_is_zero(rss_loo: f64, rss: f64, scale: f64) -> bool {
    rss_loo <= (ZERO_RSS_TOLERANCE * scale).max(CANCELLATION_TOLERANCE * rss)
}

/// Ordinary least squares fit of a response on a design.
#[derive(Debug, Clone)]
pub struct FittedModel {
    design: DesignMatrix,
    response: Vec<f64>,
    coefficients: Vec<f64>,
    residuals: Vec<f64>,
    sigma2_hat: f64,
}

impl FittedModel {
    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Ordinary (not studentized) residuals.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn leverages(&self) -> &[f64] {
        self.design.leverages()
    }

    /// Residual variance of the full fit, divisor `n - k`.
    pub fn sigma2_hat(&self) -> f64 {
        self.sigma2_hat
    }

    pub fn rss(&self) -> f64 {
        self.sigma2_hat * (self.design.nrows() - self.design.ncols()) as f64
    }
}

/// Externally studentized residuals along with their Student degrees of
/// freedom `n - k - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    pub values: Vec<f64>,
    pub df: usize,
}

impl ResidualVector {
    pub fn new(values: Vec<f64>, df: usize) -> Self {
        ResidualVector { values, df }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn fit_ols(design: &DesignMatrix, response: &[f64]) -> Result<FittedModel> {
    let n = design.nrows();
    let k = design.ncols();
    if response.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: response.len(),
            context: "response length vs design rows".into(),
        });
    }
    if let Some(i) = response.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput {
            context: format!("response row {i}"),
        });
    }

    let mut qty = vec![0.0; k];
    let mut residuals = vec![0.0; n];
    design.project(response, &mut qty, &mut residuals);

    // back-substitute R β = Q'y
    let mut coefficients = vec![0.0; k];
    for a in (0..k).rev() {
        let tail: f64 = (a + 1..k)
            .map(|b| design.r_entry(a, b) * coefficients[b])
            .sum();
        coefficients[a] = (qty[a] - tail) / design.r_entry(a, a);
    }

    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    Ok(FittedModel {
        design: design.clone(),
        response: response.to_vec(),
        coefficients,
        residuals,
        sigma2_hat: rss / (n - k) as f64,
    })
}

/// Externally studentized residuals from a single full fit.
///
/// Uses the deletion identities
/// `s(i)² = ((n-k) s² - r_i²/(1-h_i)) / (n-k-1)` and
/// `ê_i = r_i / (s(i) √(1-h_i))`, which agree with explicit leave-one-out
/// refits (see [`super::studentized_residuals_oracle`]).
pub fn studentized_residuals(model: &FittedModel) -> Result<ResidualVector> {
    let design = model.design();
    let n = design.nrows();
    let k = design.ncols();
    let df = n - k - 1;
    let scale: f64 = model.response.iter().map(|y| y * y).sum();
    let rss: f64 = model.residuals.iter().map(|r| r * r).sum();

    let mut values = Vec::with_capacity(n);
    for (i, (&r, &h)) in model.residuals.iter().zip(design.leverages()).enumerate() {
        if h >= 1.0 - LEVERAGE_TOLERANCE {
            return Err(Error::LeverageOne { index: i });
        }
        let one_minus_h = 1.0 - h;
        let rss_loo = rss - r * r / one_minus_h;
        if loo_rss_is_zero(rss_loo, rss, scale) {
            return Err(Error::ZeroResidualVariance { index: i });
        }
        let s_loo = (rss_loo / df as f64).sqrt();
        values.push(r / (s_loo * one_minus_h.sqrt()));
    }
    Ok(ResidualVector::new(values, df))
}

/// `T = max_i |ê_i|`.
pub fn statistic_t(residuals: &ResidualVector) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::EmptyInput("residual vector".into()));
    }
    Ok(residuals.values.iter().fold(0.0, |m, e| m.max(e.abs())))
}

/// Z-score of the last observation of a series against the first `n - 1`.
///
/// This is the last externally studentized residual of the intercept-only
/// model, written out directly.
pub fn zscore_last(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 3 {
        return Err(Error::TooFewRows { n, k: 1 });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput {
            context: "series".into(),
        });
    }
    let head = &series[..n - 1];
    let m = (n - 1) as f64;
    let mean = head.iter().sum::<f64>() / m;
    let ss: f64 = head.iter().map(|x| (x - mean).powi(2)).sum();
    let scale: f64 = head.iter().map(|x| x * x).sum();
    if ss <= ZERO_RSS_TOLERANCE * scale {
        return Err(Error::ZeroVariance);
    }
    let sd = (ss / (m - 1.0)).sqrt();
    Ok((series[n - 1] - mean) / (sd * (1.0 + 1.0 / m).sqrt()))
}
