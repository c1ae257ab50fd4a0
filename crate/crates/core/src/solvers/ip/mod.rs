//! Linear programming: the QR/CQR reformulations and a primal-dual
//! predictor-corrector interior point solver for problems of the form
//!
//! ```text
//! min c'x + c0   s.t.   lc <= A x <= uc,   lx <= x <= ux
//! ```
//!
//! with infinite bounds allowed on both rows and variables.

mod ipm;
mod qr;
mod sparse;

use serde::{Deserialize, Serialize};

pub use ipm::solve_lp;
pub use qr::{build_qr_lp, fit_ip, VariableMap};
pub use sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub c0: f64,
    pub a: SparseMatrix,
    pub lc: Vec<f64>,
    pub uc: Vec<f64>,
    pub lx: Vec<f64>,
    pub ux: Vec<f64>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.lc.len()
    }

    /// Rows with `lc == uc`.
    pub fn num_equalities(&self) -> usize {
        self.lc.iter().zip(&self.uc).filter(|(l, u)| l == u).count()
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.c0 + self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>()
    }

    /// Largest violation of any row or variable bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let ax = self.a.mul_vec(x);
        let rows = (0..self.num_rows()).map(|i| (self.lc[i] - ax[i]).max(ax[i] - self.uc[i]).max(0.0));
        let vars = (0..self.num_vars()).map(|j| (self.lx[j] - x[j]).max(x[j] - self.ux[j]).max(0.0));
        rows.chain(vars).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    MaxIter,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Row multipliers, one per constraint row of `A`.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
    /// Relative primal residual `||b - A x|| / (1 + ||b||)` on the internal
    /// equality form.
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl LpSolution {
    /// `|primal - dual| / (1 + |primal|)`
    pub fn relative_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs() / (1.0 + self.objective.abs())
    }
}
