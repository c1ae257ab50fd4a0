//! Solver backends. Every backend maps `(Dataset, QuantileLevels, PenaltySpec,
//! SolverOptions)` to a [`FitResult`](crate::types::FitResult).

pub mod admm;
pub mod cd;
pub mod ip;
pub mod mm;

use nalgebra::{DMatrix, DVector};

use crate::design::CompositeDesign;
use crate::error::Result;
use crate::loss;
use crate::order::select_quantile;
use crate::penalty::{AdaptiveWeights, PenaltySpec};
use crate::types::{Algorithm, Dataset, FitResult, QuantileLevels, SolverOptions};

/// Runs the solver selected by `opts.algorithm`.
pub fn solve(
    data: &Dataset,
    levels: &QuantileLevels,
    penalty: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<FitResult> {
    match opts.algorithm {
        Algorithm::Admm => admm::fit_admm(data, levels, penalty, opts),
        Algorithm::Mm => mm::fit_mm(data, levels, penalty, opts),
        Algorithm::Cd => cd::fit_cd(data, levels, penalty, opts),
        Algorithm::Ip => ip::fit_ip(data, levels, penalty, opts),
    }
}

/// Linear maps `theta -> X* theta` and `v -> X*' v` for the stacked design.
pub trait StackedOperator {
    fn rows(&self) -> usize;
    fn levels(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, theta: &DVector<f64>) -> DVector<f64>;
    fn apply_t(&self, v: &DVector<f64>) -> DVector<f64>;

    /// `X*_cov beta_cov`: the stacked product with intercept columns removed.
    fn apply_covariates(&self, theta: &DVector<f64>) -> DVector<f64> {
        let mut t = theta.clone();
        t.rows_mut(0, self.levels()).fill(0.0);
        self.apply(&t)
    }

    /// `X*_cov' v`, length p.
    fn apply_t_covariates(&self, v: &DVector<f64>) -> DVector<f64> {
        let full = self.apply_t(v);
        full.rows(self.levels(), full.len() - self.levels()).into_owned()
    }
}

impl StackedOperator for CompositeDesign {
    fn rows(&self) -> usize {
        self.xs.nrows()
    }

    fn levels(&self) -> usize {
        CompositeDesign::levels(self)
    }

    fn cols(&self) -> usize {
        self.xs.ncols()
    }

    fn apply(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.xs * theta
    }

    fn apply_t(&self, v: &DVector<f64>) -> DVector<f64> {
        self.xs.tr_mul(v)
    }
}

/// Stacked design represented implicitly by `X` and the level count.
pub(crate) struct Stacked<'a> {
    pub x: &'a DMatrix<f64>,
    pub k: usize,
}

impl<'a> Stacked<'a> {
    pub fn new(data: &'a Dataset, levels: &QuantileLevels) -> Self {
        Self { x: data.x(), k: levels.len() }
    }

    fn n(&self) -> usize {
        self.x.nrows()
    }

    /// `X*' X*` assembled blockwise.
    pub fn gram(&self) -> DMatrix<f64> {
        let (n, p, k) = (self.n(), self.x.ncols(), self.k);
        let mut g = DMatrix::zeros(k + p, k + p);
        let col_sums: Vec<f64> = (0..p).map(|j| self.x.column(j).sum()).collect();
        for a in 0..k {
            g[(a, a)] = n as f64;
            for j in 0..p {
                g[(a, k + j)] = col_sums[j];
                g[(k + j, a)] = col_sums[j];
            }
        }
        let xtx = self.x.tr_mul(self.x) * k as f64;
        g.view_mut((k, k), (p, p)).copy_from(&xtx);
        g
    }
}

impl StackedOperator for Stacked<'_> {
    fn rows(&self) -> usize {
        self.n() * self.k
    }

    fn levels(&self) -> usize {
        self.k
    }

    fn cols(&self) -> usize {
        self.k + self.x.ncols()
    }

    fn apply(&self, theta: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let beta = theta.rows(self.k, self.x.ncols());
        let xb = self.x * beta;
        DVector::from_fn(n * self.k, |r, _| theta[r / n] + xb[r % n])
    }

    fn apply_t(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let p = self.x.ncols();
        let mut out = DVector::zeros(self.k + p);
        let mut folded = DVector::zeros(n);
        for b in 0..self.k {
            let block = v.rows(b * n, n);
            out[b] = block.sum();
            folded += block;
        }
        let xt = self.x.tr_mul(&folded);
        out.rows_mut(self.k, p).copy_from(&xt);
        out
    }
}

/// Objective of the fitted problem at `(intercepts, beta)`; used by every
/// backend so results are comparable.
pub(crate) fn final_objective(
    data: &Dataset,
    levels: &QuantileLevels,
    weights: Option<&AdaptiveWeights>,
    intercepts: &[f64],
    beta: &[f64],
) -> f64 {
    let xb = data.x() * DVector::from_column_slice(beta);
    let fit = loss::fidelity(&xb, data.y(), intercepts, levels.as_slice());
    fit + weights.map_or(0.0, |w| w.value(beta))
}

/// Per-level lower sample quantiles of `y - X beta`.
pub(crate) fn quantile_intercepts(data: &Dataset, levels: &QuantileLevels, beta: &[f64]) -> Vec<f64> {
    let xb = data.x() * DVector::from_column_slice(beta);
    let base: Vec<f64> = (0..data.n()).map(|i| data.y()[i] - xb[i]).collect();
    let mut buf = base.clone();
    levels
        .as_slice()
        .iter()
        .map(|&tau| {
            buf.copy_from_slice(&base);
            select_quantile(&mut buf, tau)
        })
        .collect()
}

/// Indices of covariate columns that are identically zero.
pub(crate) fn zero_columns(x: &DMatrix<f64>) -> Vec<usize> {
    (0..x.ncols()).filter(|&j| x.column(j).iter().all(|&v| v == 0.0)).collect()
}
