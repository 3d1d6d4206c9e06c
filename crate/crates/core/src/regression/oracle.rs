//! Studentized residuals by explicit leave-one-out refits.
//!
//! Every observation gets its own normal-equations solve on the design with
//! that row removed. This costs `O(n² k²)` and exists as an independent
//! check on the fast deletion identities, and as the `--oracle` mode of the
//! command-line tool.

use nalgebra::{DMatrix, DVector};

use super::design::{DesignMatrix, RANK_TOLERANCE};
use super::fit::{ResidualVector, ZERO_RSS_TOLERANCE};
use crate::error::{Error, Result};

struct LeaveOneOut {
    gram_inv: DMatrix<f64>,
    theta: DVector<f64>,
}

fn refit_without(design: &DesignMatrix, response: &[f64], i: usize) -> Result<LeaveOneOut> {
    let k = design.ncols();
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    {
        let g = gram.as_mut_slice();
        let b = rhs.as_mut_slice();
        for (j, &y) in response.iter().enumerate() {
            if j == i {
                continue;
            }
            let row = design.row(j);
            for a in 0..k {
                let ra = row[a];
                b[a] += ra * y;
                for c in a..k {
                    g[c * k + a] += ra * row[c];
                }
            }
        }
    }
    gram.fill_lower_triangle_with_upper_triangle();

    let largest = (0..k).map(|a| gram[(a, a)]).fold(0.0, f64::max);
    let chol = gram.cholesky().ok_or(Error::LeverageOne { index: i })?;
    let l = chol.l_dirty();
    if (0..k).any(|a| l[(a, a)].powi(2) <= RANK_TOLERANCE * RANK_TOLERANCE * largest) {
        return Err(Error::LeverageOne { index: i });
    }
    let theta = chol.solve(&rhs);
    Ok(LeaveOneOut {
        gram_inv: chol.inverse(),
        theta,
    })
}

/// `1 + L_i (M(i)'M(i))⁻¹ L_i'`, the variance inflation of the
/// leave-one-out prediction error at row `i`.
pub fn leave_one_out_inflation(design: &DesignMatrix, i: usize) -> Result<f64> {
    let zeros = vec![0.0; design.nrows()];
    let fit = refit_without(design, &zeros, i)?;
    let li = DVector::from_column_slice(design.row(i));
    Ok(1.0 + (li.transpose() * &fit.gram_inv * &li)[(0, 0)])
}

/// Literal leave-one-out computation of every externally studentized
/// residual.
pub fn studentized_residuals_oracle(
    design: &DesignMatrix,
    response: &[f64],
) -> Result<ResidualVector> {
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
    let df = n - k - 1;
    let scale: f64 = response.iter().map(|y| y * y).sum();

    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let fit = refit_without(design, response, i)?;
        let theta = fit.theta.as_slice();
        let predict = |row: &[f64]| -> f64 { row.iter().zip(theta).map(|(a, b)| a * b).sum() };

        let rss: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| (response[j] - predict(design.row(j))).powi(2))
            .sum();
        if rss <= ZERO_RSS_TOLERANCE * scale {
            return Err(Error::ZeroResidualVariance { index: i });
        }
        let sigma = (rss / df as f64).sqrt();

        let li = DVector::from_column_slice(design.row(i));
        let inflation = 1.0 + (li.transpose() * &fit.gram_inv * &li)[(0, 0)];
        let prediction = predict(design.row(i));
        values.push((response[i] - prediction) / (sigma * inflation.sqrt()));
    }
    Ok(ResidualVector::new(values, df))
}
