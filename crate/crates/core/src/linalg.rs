//! Dense symmetric positive-definite solves with a ridge fallback.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Pivot ratio below which a Cholesky factor is treated as rank deficient.
const PIVOT_RATIO: f64 = 1e-7;

/// Cholesky factor of the symmetrically scaled matrix `S m S + ridge * I`,
/// `S = diag(m_ii^{-1/2})`. The scaling strips ill-conditioning that comes
/// only from badly scaled rows; `ridge` is zero unless the scaled matrix is
/// numerically singular.
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    scale: DVector<f64>,
    pub ridge: f64,
}

impl SpdFactor {
    /// Factorizes `m`, adding `1e-8` to the unit diagonal of the scaled matrix
    /// (growing by 100x per retry) if it is not numerically positive definite.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        let scale = DVector::from_fn(dim, |i, _| {
            let d = m[(i, i)];
            if d > 0.0 && d.is_finite() {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        });
        let mut scaled = m;
        for j in 0..dim {
            for i in 0..dim {
                scaled[(i, j)] *= scale[i] * scale[j];
            }
        }
        if dim == 0 {
            let chol = Cholesky::new(scaled).ok_or_else(|| Error::Numerical("empty factorization".into()))?;
            return Ok(Self { chol, scale, ridge: 0.0 });
        }
        if let Some(chol) = Cholesky::new(scaled.clone()).filter(well_conditioned) {
            return Ok(Self { chol, scale, ridge: 0.0 });
        }
        let mut ridge = 1e-8;
        for _ in 0..8 {
            let mut shifted = scaled.clone();
            for i in 0..dim {
                shifted[(i, i)] += ridge;
            }
            if let Some(chol) = Cholesky::new(shifted) {
                return Ok(Self { chol, scale, ridge });
            }
            ridge *= 100.0;
        }
        Err(Error::Numerical(format!(
            "matrix of order {dim} is not positive definite even with ridge {ridge:e}"
        )))
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_mut(&mut x);
        x
    }

    pub fn solve_mut(&self, b: &mut DVector<f64>) {
        b.component_mul_assign(&self.scale);
        self.chol.solve_mut(b);
        b.component_mul_assign(&self.scale);
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            col.component_mul_assign(&self.scale);
        }
        self.chol.solve_mut(&mut x);
        for mut col in x.column_iter_mut() {
            col.component_mul_assign(&self.scale);
        }
        x
    }
}

fn well_conditioned(chol: &Cholesky<f64, Dyn>) -> bool {
    let d = chol.l_dirty().diagonal();
    let max = d.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let min = d.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
    max > 0.0 && min > PIVOT_RATIO * max
}

/// `A' diag(w) A` without forming `diag(w)`.
pub fn weighted_gram(a: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut scaled = a.clone();
    for (i, &wi) in w.iter().enumerate() {
        scaled.row_mut(i).scale_mut(wi);
    }
    a.tr_mul(&scaled)
}
