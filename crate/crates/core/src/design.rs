//! Stacked design for composite quantile regression.

use nalgebra::{DMatrix, DVector};

use crate::types::{Dataset, QuantileLevels};

/// `X*` (nK x (K+p)), `Y*` and `tau*` for K levels.
///
/// Row block `k` carries a 1 in intercept column `k`, zeros in the other
/// intercept columns, then a copy of `X`. With `K = 1` this is `[1 | X]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeDesign {
    pub xs: DMatrix<f64>,
    pub ys: DVector<f64>,
    pub taus: DVector<f64>,
    n: usize,
    k: usize,
}

impl CompositeDesign {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.xs.ncols() - self.k
    }

    /// Stacked parameter vector `(b_1, ..., b_K, beta)`.
    pub fn stack(&self, intercepts: &[f64], beta: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.k + beta.len(), intercepts.iter().chain(beta).copied())
    }

    /// Splits a stacked parameter vector into intercepts and covariate coefficients.
    pub fn unstack(&self, theta: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
        let s = theta.as_slice();
        (s[..self.k].to_vec(), s[self.k..].to_vec())
    }

    /// Intercept-broadcast vector `b*` (each `b_k` repeated n times).
    pub fn broadcast_intercepts(&self, intercepts: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.n * self.k, |r, _| intercepts[r / self.n])
    }
}

pub fn stack_composite(data: &Dataset, levels: &QuantileLevels) -> CompositeDesign {
    let (n, p, k) = (data.n(), data.p(), levels.len());
    let x = data.x();
    let xs = DMatrix::from_fn(n * k, k + p, |r, c| {
        let (block, i) = (r / n, r % n);
        if c < k {
            if c == block {
                1.0
            } else {
                0.0
            }
        } else {
            x[(i, c - k)]
        }
    });
    let ys = DVector::from_fn(n * k, |r, _| data.y()[r % n]);
    let taus = DVector::from_fn(n * k, |r, _| levels.as_slice()[r / n]);
    CompositeDesign { xs, ys, taus, n, k }
}
