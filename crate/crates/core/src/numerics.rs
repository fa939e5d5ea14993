//! Dense real linear algebra: SVD-based pseudoinverse and minimum-norm
//! least-squares solves.
//!
//! The SVD itself comes from `nalgebra`; rank truncation is applied here with
//! a tolerance tied to the largest singular value.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A finite, non-empty real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix(DMatrix<f64>);

impl RealMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(n_rows, n_cols, &flat)
    }

    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidMatrix("matrix must be non-empty".into()));
        }
        if let Some((idx, v)) = m.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            // nalgebra storage is column-major
            let (r, c) = (idx % m.nrows(), idx / m.nrows());
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry {v} at ({r},{c})"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> RealMatrix {
        RealMatrix(self.0.transpose())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols()
            )));
        }
        let v = &self.0 * DVector::from_column_slice(x);
        Ok(v.iter().copied().collect())
    }
}

/// Solution of `A x ≈ b` in the minimum-norm least-squares sense.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: Vec<f64>,
    /// max_i |(A x − b)_i|
    pub residual_inf: f64,
    /// Σ x_i²
    pub norm_sq: f64,
}

/// Default rank cutoff: max(rows, cols) · ε · σ_max.
pub fn default_rank_tol(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    m.clone().svd(false, false).singular_values
}

/// Numerical rank with the same cutoff convention as [`pseudoinverse`].
pub fn rank(m: &RealMatrix, tol: f64) -> usize {
    let s = singular_values(&m.0);
    let smax = s.max();
    let cut = if tol > 0.0 {
        tol
    } else {
        default_rank_tol(m.rows(), m.cols(), smax)
    };
    s.iter().filter(|&&v| v > cut).count()
}

/// Moore-Penrose pseudoinverse. Singular values at or below `tol` are
/// dropped; `tol = 0` selects [`default_rank_tol`].
pub fn pseudoinverse(m: &RealMatrix, tol: f64) -> Result<RealMatrix> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    let svd = m.0.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let s = &svd.singular_values;
    let cut = if tol > 0.0 {
        tol
    } else {
        default_rank_tol(m.rows(), m.cols(), s.max())
    };

    // M⁺ = V Σ⁺ Uᵀ
    let mut out = DMatrix::<f64>::zeros(m.cols(), m.rows());
    for (i, &sigma) in s.iter().enumerate() {
        if sigma <= cut {
            continue;
        }
        let inv = 1.0 / sigma;
        let v_col = v_t.row(i).transpose();
        let u_col = u.column(i);
        out.ger(inv, &v_col, &u_col, 1.0);
    }
    RealMatrix::new(out)
}

/// Minimum-Euclidean-norm least-squares solution `x = A⁺ b`.
pub fn min_norm_solve(a: &RealMatrix, b: &[f64], tol: f64) -> Result<SolveResult> {
    if b.len() != a.rows() {
        return Err(Error::Shape(format!(
            "right-hand side has {} entries, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    let pinv = pseudoinverse(a, tol)?;
    Ok(solve_with_pinv(a, &pinv, b))
}

/// Applies a precomputed pseudoinverse. Callers guarantee matching shapes.
pub(crate) fn solve_with_pinv(a: &RealMatrix, pinv: &RealMatrix, b: &[f64]) -> SolveResult {
    let bv = DVector::from_column_slice(b);
    let x = &pinv.0 * &bv;
    let residual_inf = (&a.0 * &x - &bv).amax();
    let norm_sq = x.norm_squared();
    SolveResult {
        solution: x.iter().copied().collect(),
        residual_inf,
        norm_sq,
    }
}
