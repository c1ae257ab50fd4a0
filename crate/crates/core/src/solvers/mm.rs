//! Majorize-minimization on the perturbed check loss
//! `rho_tau^eps(r) = rho_tau(r) - (eps/2) ln(eps + |r|)`.
//!
//! At the current residuals each loss term is majorized by the quadratic
//! `xi(r | r_t) = 1/4 [ r^2 / (eps + |r_t|) + (4 tau - 2) r + c ]`, tangent at
//! `r_t`. When penalized, `|beta_j|` is replaced by its local quadratic
//! approximation `|b_t| + (beta_j^2 - b_t^2) / (2 (|b_t| + eps))`. The surrogate is
//! exactly quadratic so one symmetric solve gives its minimizer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{weighted_gram, SpdFactor};
use crate::loss::rho;
use crate::penalty::PenaltySpec;
use crate::solvers::{final_objective, quantile_intercepts, zero_columns};
use crate::types::{Algorithm, Dataset, Diagnostics, FitResult, QuantileLevels, SolverOptions};

/// Penalized coefficients below this magnitude are frozen at zero.
const FREEZE_BELOW: f64 = 1e-6;

/// Iterate of the MM scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MmState {
    pub intercepts: Vec<f64>,
    pub beta: Vec<f64>,
    /// `residuals[(i, k)] = y_i - b_k - x_i' beta`.
    pub residuals: DMatrix<f64>,
    pub eps: f64,
}

pub fn smoothed_check_loss(t: f64, tau: f64, eps: f64) -> f64 {
    rho(t, tau) - 0.5 * eps * (eps + t.abs()).ln()
}

/// Constant `c` of the majorizer, fixed by tangency at `r_prev`.
fn tangency_constant(r_prev: f64, tau: f64, eps: f64) -> f64 {
    4.0 * smoothed_check_loss(r_prev, tau, eps) - r_prev * r_prev / (eps + r_prev.abs()) - (4.0 * tau - 2.0) * r_prev
}

/// Quadratic majorizer `xi(r | r_prev)` of the perturbed check loss.
pub fn majorizer_value(r: f64, r_prev: f64, tau: f64, eps: f64) -> f64 {
    0.25 * (r * r / (eps + r_prev.abs()) + (4.0 * tau - 2.0) * r + tangency_constant(r_prev, tau, eps))
}

/// Perturbed penalty `|b| - eps ln(eps + |b|)`, the function the local
/// quadratic approximation majorizes.
fn smoothed_abs(b: f64, eps: f64) -> f64 {
    b.abs() - eps * (eps + b.abs()).ln()
}

struct Problem<'a> {
    data: &'a Dataset,
    levels: &'a [f64],
    eps: f64,
    /// `lambda * w_j` per covariate; empty when unpenalized.
    strengths: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, intercepts: &[f64], beta: &[f64]) -> DMatrix<f64> {
        let xb = self.data.x() * DVector::from_column_slice(beta);
        let y = self.data.y();
        DMatrix::from_fn(self.data.n(), self.levels.len(), |i, k| y[i] - intercepts[k] - xb[i])
    }

    /// Perturbed objective over the coordinates in `free`.
    fn surrogate(&self, res: &DMatrix<f64>, beta: &[f64], free: &[bool]) -> f64 {
        let mut total = 0.0;
        for (k, &tau) in self.levels.iter().enumerate() {
            total += res.column(k).iter().map(|&r| smoothed_check_loss(r, tau, self.eps)).sum::<f64>();
        }
        if !self.strengths.is_empty() {
            for (j, &b) in beta.iter().enumerate() {
                if free[j] {
                    total += self.strengths[j] * smoothed_abs(b, self.eps);
                }
            }
        }
        total
    }
}

/// Gradient and Hessian of the surrogate at the current iterate, restricted to
/// intercepts followed by the free covariates in `cols`.
fn surrogate_system(
    prob: &Problem<'_>,
    res: &DMatrix<f64>,
    beta: &[f64],
    cols: &[usize],
) -> (DMatrix<f64>, DVector<f64>) {
    let (n, k, q) = (prob.data.n(), prob.levels.len(), cols.len());
    let eps = prob.eps;
    // curvature and slope of xi at r_t
    let curv = DMatrix::from_fn(n, k, |i, kk| 0.5 / (eps + res[(i, kk)].abs()));
    let slope = DMatrix::from_fn(n, k, |i, kk| {
        let r = res[(i, kk)];
        0.25 * (2.0 * r / (eps + r.abs()) + 4.0 * prob.levels[kk] - 2.0)
    });
    let xf = prob.data.x().select_columns(cols);

    let mut h = DMatrix::zeros(k + q, k + q);
    let mut g = DVector::zeros(k + q);
    let row_curv: Vec<f64> = (0..n).map(|i| curv.row(i).sum()).collect();
    let row_slope = DVector::from_fn(n, |i, _| slope.row(i).sum());
    let cross = xf.tr_mul(&curv); // q x k
    for kk in 0..k {
        h[(kk, kk)] = curv.column(kk).sum();
        g[kk] = -slope.column(kk).sum();
        for c in 0..q {
            h[(kk, k + c)] = cross[(c, kk)];
            h[(k + c, kk)] = cross[(c, kk)];
        }
    }
    h.view_mut((k, k), (q, q)).copy_from(&weighted_gram(&xf, &row_curv));
    g.rows_mut(k, q).copy_from(&(-xf.tr_mul(&row_slope)));

    if !prob.strengths.is_empty() {
        for (c, &j) in cols.iter().enumerate() {
            let d = prob.strengths[j] / (beta[j].abs() + eps);
            h[(k + c, k + c)] += d;
            g[k + c] += d * beta[j];
        }
    }
    (h, g)
}

/// Fits QR or CQR by majorize-minimization, with the adaptive-lasso penalty if
/// given. A penalized fit starts from the pilot coefficients.
pub fn fit_mm(
    data: &Dataset,
    levels: &QuantileLevels,
    penalty: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<FitResult> {
    opts.validate()?;
    let weights = penalty.resolve(data.p())?;
    let (p, k) = (data.p(), levels.len());
    let zero_cols = zero_columns(data.x());

    let mut free = vec![true; p];
    for &j in &zero_cols {
        free[j] = false;
    }
    let mut beta = vec![0.0; p];
    let strengths = match (&weights, penalty) {
        (Some(w), PenaltySpec::AdaptiveLasso { pilot: Some(pilot), .. }) => {
            for j in 0..p {
                if w.active[j] && free[j] {
                    beta[j] = pilot[j];
                } else {
                    free[j] = false;
                }
            }
            (0..p).map(|j| w.strength(j)).collect()
        }
        _ => Vec::new(),
    };
    let prob = Problem { data, levels: levels.as_slice(), eps: opts.eps_mm, strengths };
    let mut intercepts = quantile_intercepts(data, levels, &beta);

    let mut diagnostics = Diagnostics { skipped_coordinates: zero_cols, ..Default::default() };
    let mut converged = false;
    let mut iterations = 0;
    let mut res = prob.residuals(&intercepts, &beta);

    while iterations < opts.max_iter {
        iterations += 1;
        let cols: Vec<usize> = (0..p).filter(|&j| free[j]).collect();
        let before = if opts.trace { prob.surrogate(&res, &beta, &free) } else { 0.0 };

        let (h, g) = surrogate_system(&prob, &res, &beta, &cols);
        let factor = SpdFactor::new(h)?;
        diagnostics.ridge_fallback |= factor.ridge > 0.0;
        let step = -factor.solve(&g);
        if !step.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!("MM step became non-finite at iteration {iterations}")));
        }

        let mut max_change = 0.0f64;
        for kk in 0..k {
            intercepts[kk] += step[kk];
            max_change = max_change.max(step[kk].abs());
        }
        for (c, &j) in cols.iter().enumerate() {
            beta[j] += step[k + c];
            max_change = max_change.max(step[k + c].abs());
        }
        res = prob.residuals(&intercepts, &beta);
        if opts.trace {
            let after = prob.surrogate(&res, &beta, &free);
            diagnostics.descent.push((before, after));
        }

        if !prob.strengths.is_empty() {
            let mut froze = false;
            for &j in &cols {
                if beta[j].abs() < FREEZE_BELOW {
                    beta[j] = 0.0;
                    free[j] = false;
                    froze = true;
                }
            }
            if froze {
                res = prob.residuals(&intercepts, &beta);
            }
        }
        if max_change < opts.tol {
            converged = true;
            break;
        }
    }

    let objective = final_objective(data, levels, weights.as_ref(), &intercepts, &beta);
    Ok(FitResult {
        intercepts,
        coefficients: beta,
        iterations,
        converged,
        objective,
        algorithm: Algorithm::Mm,
        diagnostics,
    })
}
