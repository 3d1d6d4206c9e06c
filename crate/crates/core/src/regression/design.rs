use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Pivots of the triangular factor smaller than this fraction of the largest
/// pivot mark a column as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Leverages at or above `1 - LEVERAGE_TOLERANCE` are treated as exactly one.
pub const LEVERAGE_TOLERANCE: f64 = 1e-10;

/// An `n × k` design matrix whose first column is the intercept.
///
/// `k` counts every column, the intercept included, so the residual degrees
/// of freedom are `n - k` for the full fit and `n - k - 1` once an
/// observation is left out.
///
/// The matrix is factorized once on construction (thin orthogonal factor and
/// leverages are cached) and is immutable afterwards. Cloning is cheap; the
/// data sits behind an `Arc` so a design can be shared across workers.
#[derive(Clone)]
pub struct DesignMatrix {
    inner: Arc<Inner>,
}

struct Inner {
    nrows: usize,
    ncols: usize,
    // row-major
    entries: Vec<f64>,
    // column-major thin orthogonal factor, n × k
    q: Vec<f64>,
    // row-major upper triangle, k × k
    r: Vec<f64>,
    leverages: Vec<f64>,
    fingerprint: String,
}

impl std::fmt::Debug for DesignMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DesignMatrix")
            .field("nrows", &self.nrows())
            .field("ncols", &self.ncols())
            .field("fingerprint", &self.fingerprint())
            .finish()
    }
}

/// Builds a design matrix from predictor columns, prepending the intercept.
///
/// `nrows` fixes the number of observations; it is what makes the
/// intercept-only design (`predictors` empty) well defined.
pub fn build_design<C: AsRef<[f64]>>(predictors: &[C], nrows: usize) -> Result<DesignMatrix> {
    if nrows == 0 {
        return Err(Error::EmptyInput("design needs at least one row".into()));
    }
    for (j, col) in predictors.iter().enumerate() {
        let col = col.as_ref();
        if col.len() != nrows {
            return Err(Error::DimensionMismatch {
                expected: nrows,
                actual: col.len(),
                context: format!("length of predictor column {j}"),
            });
        }
        if let Some(i) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput {
                context: format!("predictor column {j}, row {i}"),
            });
        }
    }

    let ncols = predictors.len() + 1;
    let mut entries = Vec::with_capacity(nrows * ncols);
    for i in 0..nrows {
        entries.push(1.0);
        entries.extend(predictors.iter().map(|c| c.as_ref()[i]));
    }
    DesignMatrix::from_row_major(nrows, ncols, entries)
}

impl DesignMatrix {
    /// The `n × 1` column of ones.
    pub fn intercept_only(nrows: usize) -> Result<Self> {
        build_design::<Vec<f64>>(&[], nrows)
    }

    /// Builds a design from a full row-major matrix. The first column must
    /// already be the intercept.
    pub fn from_row_major(nrows: usize, ncols: usize, entries: Vec<f64>) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(Error::EmptyInput(
                "design needs at least one row and column".into(),
            ));
        }
        if entries.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                expected: nrows * ncols,
                actual: entries.len(),
                context: "design entries".into(),
            });
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput {
                context: format!("design row {}, column {}", pos / ncols, pos % ncols),
            });
        }
        if (0..nrows).any(|i| entries[i * ncols] != 1.0) {
            return Err(Error::InvalidConfig(
                "first design column must be the intercept (all ones)".into(),
            ));
        }
        if nrows < ncols {
            return Err(Error::RankDeficient { column: nrows });
        }

        let m = DMatrix::from_row_slice(nrows, ncols, &entries);
        let qr = m.qr();
        let r_mat = qr.r();
        let largest = (0..ncols).map(|j| r_mat[(j, j)].abs()).fold(0.0, f64::max);
        if let Some(j) = (0..ncols).find(|&j| r_mat[(j, j)].abs() <= RANK_TOLERANCE * largest) {
            return Err(Error::RankDeficient { column: j });
        }
        if nrows <= ncols + 1 {
            return Err(Error::TooFewRows { n: nrows, k: ncols });
        }

        let q_mat = qr.q();
        let q = q_mat.as_slice().to_vec();
        let mut r = vec![0.0; ncols * ncols];
        for a in 0..ncols {
            for b in a..ncols {
                r[a * ncols + b] = r_mat[(a, b)];
            }
        }
        let leverages = (0..nrows)
            .map(|i| (0..ncols).map(|j| q[j * nrows + i].powi(2)).sum())
            .collect();
        let fingerprint = fingerprint(nrows, ncols, &entries);

        Ok(DesignMatrix {
            inner: Arc::new(Inner {
                nrows,
                ncols,
                entries,
                q,
                r,
                leverages,
                fingerprint,
            }),
        })
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows
    }

    /// Number of columns, intercept included.
    pub fn ncols(&self) -> usize {
        self.inner.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.inner.ncols;
        &self.inner.entries[i * k..(i + 1) * k]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows()).map(|i| self.row(i)[j]).collect()
    }

    pub fn entries_row_major(&self) -> &[f64] {
        &self.inner.entries
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nrows(), self.ncols(), &self.inner.entries)
    }

    /// The matrix with row `i` deleted.
    pub fn without_row(&self, i: usize) -> DMatrix<f64> {
        self.to_matrix().remove_row(i)
    }

    /// Column `j` of the thin orthogonal factor.
    pub fn q_column(&self, j: usize) -> &[f64] {
        let n = self.inner.nrows;
        &self.inner.q[j * n..(j + 1) * n]
    }

    /// Entry `(a, b)` of the upper-triangular factor.
    pub fn r_entry(&self, a: usize, b: usize) -> f64 {
        self.inner.r[a * self.inner.ncols + b]
    }

    /// Diagonal of the hat matrix.
    pub fn leverages(&self) -> &[f64] {
        &self.inner.leverages
    }

    /// Hex digest identifying the exact entries of this design.
    pub fn fingerprint(&self) -> &str {
        &self.inner.fingerprint
    }

    /// Fails with `LeverageOne` at the first observation whose deletion
    /// leaves a singular design.
    pub fn check_leave_one_out(&self) -> Result<()> {
        match self
            .leverages()
            .iter()
            .position(|&h| h >= 1.0 - LEVERAGE_TOLERANCE)
        {
            Some(index) => Err(Error::LeverageOne { index }),
            None => Ok(()),
        }
    }

    /// Projects `y` onto the column space: writes `Q'y` into `coef` and
    /// `y - QQ'y` into `resid`.
    pub(crate) fn project(&self, y: &[f64], coef: &mut [f64], resid: &mut [f64]) {
        let n = self.nrows();
        resid.copy_from_slice(y);
        for (j, c) in coef.iter_mut().enumerate() {
            let qj = self.q_column(j);
            *c = qj.iter().zip(y).map(|(a, b)| a * b).sum();
        }
        for (j, &c) in coef.iter().enumerate() {
            let qj = self.q_column(j);
            for i in 0..n {
                resid[i] -= c * qj[i];
            }
        }
    }
}

fn fingerprint(nrows: usize, ncols: usize, entries: &[f64]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((nrows as u64).to_le_bytes());
    hasher.update((ncols as u64).to_le_bytes());
    for v in entries {
        hasher.update(v.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(32);
    for b in &digest[..16] {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prepends_intercept() {
        let d = build_design(&[vec![1.0, 2.0, 3.0, 4.0]], 4).unwrap();
        assert_eq!(d.nrows(), 4);
        assert_eq!(d.ncols(), 2);
        assert_eq!(
            d.entries_row_major(),
            &[1.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0, 4.0]
        );
    }

    #[test]
    fn intercept_only_design() {
        let d = DesignMatrix::intercept_only(4).unwrap();
        assert_eq!(d.ncols(), 1);
        assert_eq!(d.column(0), vec![1.0; 4]);
        for h in d.leverages() {
            assert!((h - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn collinear_columns_are_rejected() {
        let err = build_design(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]], 3).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }), "{err}");
    }

    #[test]
    fn constant_predictor_collides_with_intercept() {
        let err = build_design(&[vec![5.0; 6]], 6).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { column: 1 }), "{err}");
    }

    #[test]
    fn too_few_rows() {
        let err = build_design(&[vec![0.0, 1.0, 3.0]], 3).unwrap_err();
        assert!(matches!(err, Error::TooFewRows { n: 3, k: 2 }), "{err}");
    }

    #[test]
    fn non_finite_rejected() {
        let err = build_design(&[vec![0.0, f64::NAN, 3.0, 4.0]], 4).unwrap_err();
        assert!(matches!(err, Error::NonFiniteInput { .. }));
        let err = build_design(&[vec![0.0, 1.0]], 4).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn leverage_one_detected() {
        let d = build_design(&[vec![0.0, 0.0, 0.0, 1.0]], 4).unwrap();
        assert!(matches!(
            d.check_leave_one_out(),
            Err(Error::LeverageOne { index: 3 })
        ));
    }

    #[test]
    fn fingerprint_tracks_entries() {
        let a = build_design(&[vec![1.0, 2.0, 3.0, 4.0]], 4).unwrap();
        let b = build_design(&[vec![1.0, 2.0, 3.0, 4.0]], 4).unwrap();
        let c = build_design(&[vec![1.0, 2.0, 3.0, 4.5]], 4).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn row_deleted_view() {
        let d = build_design(&[vec![1.0, 2.0, 3.0, 4.0]], 4).unwrap();
        let m = d.without_row(1);
        assert_eq!(m.nrows(), 3);
        assert_eq!(m[(1, 1)], 3.0);
    }
}
