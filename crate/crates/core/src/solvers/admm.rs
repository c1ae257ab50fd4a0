//! ADMM for (composite) quantile regression on the split `X* theta + r = Y*`.
//!
//! Each iteration performs
//!
//! ```text
//! r     <- argmin_r  sum rho_tau*(r) + (rho/2) ||Y* - X* theta + u/rho - r||^2
//! theta <- argmin_th (rho/2) ||Y* - r + u/rho - X* theta||^2 + lambda sum_j w_j |beta_j|
//! u     <- u + rho (Y* - r - X* theta)
//! ```
//!
//! The residual step is a shifted soft threshold. The coefficient step is a
//! fixed least-squares solve when unpenalized and an adaptive-lasso
//! least-squares problem (cyclic coordinate descent on the Gram matrix)
//! otherwise. Iteration stops when the primal and dual residual norms fall
//! below the thresholds computed by [`admm_stopping`].

use nalgebra::{DMatrix, DVector};

use crate::design::CompositeDesign;
use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
use crate::loss::shrink;
use crate::penalty::PenaltySpec;
use crate::solvers::{final_objective, zero_columns, Stacked, StackedOperator};
use crate::types::{Algorithm, Dataset, Diagnostics, FitResult, QuantileLevels, SolverOptions};

/// Inner coordinate-descent sweeps allowed per penalized coefficient step.
const INNER_SWEEPS: usize = 200;

/// Iterate of the ADMM scheme. `theta` stacks the K intercepts then the p
/// covariate coefficients; `r`, `r_prev` and `u` have length nK.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub theta: DVector<f64>,
    pub r: DVector<f64>,
    pub r_prev: DVector<f64>,
    pub u: DVector<f64>,
    pub iteration: usize,
    pub regularized: bool,
}

/// Outcome of the primal/dual residual test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingCheck {
    pub stop: bool,
    pub primal_norm: f64,
    pub dual_norm: f64,
    pub eps_primal: f64,
    pub eps_dual: f64,
}

/// Residual-based stopping rule.
///
/// `r_primal = Y* - X* theta - r`. Without a penalty,
/// `r_dual = rho X*' (r - r_prev)`,
/// `eps_primal = sqrt(nK) eps_abs + eps_rel max{||X* theta||^2, ||r||^2, ||Y*||^2}` and
/// `eps_dual = sqrt(len r_dual) eps_abs + eps_rel ||X*' u||^2`.
/// With a penalty the intercept columns are dropped from the dual residual and
/// from the first term of the max, and `||Y*||^2` becomes `||b* - Y*||^2`.
pub fn admm_stopping(state: &AdmmState, design: &CompositeDesign, opts: &SolverOptions) -> StoppingCheck {
    check_residuals(state, design, design.ys.as_slice(), opts)
}

fn check_residuals<S: StackedOperator>(
    state: &AdmmState,
    op: &S,
    ys: &[f64],
    opts: &SolverOptions,
) -> StoppingCheck {
    let k = op.levels();
    let rows = op.rows();
    let ys = DVector::from_column_slice(ys);
    let xtheta = op.apply(&state.theta);
    let primal = &ys - &xtheta - &state.r;
    let dr = &state.r - &state.r_prev;
    let xtu_sq = op.apply_t(&state.u).norm_squared();
    let r_sq = state.r.norm_squared();

    let (dual, fit_sq, data_sq) = if state.regularized {
        let dual = op.apply_t_covariates(&dr) * opts.rho;
        let fit_sq = op.apply_covariates(&state.theta).norm_squared();
        let n = rows / k.max(1);
        let data_sq: f64 = (0..rows).map(|i| (state.theta[i / n] - ys[i]).powi(2)).sum();
        (dual, fit_sq, data_sq)
    } else {
        (op.apply_t(&dr) * opts.rho, xtheta.norm_squared(), ys.norm_squared())
    };

    let eps_primal = (rows as f64).sqrt() * opts.eps_abs + opts.eps_rel * fit_sq.max(r_sq).max(data_sq);
    let eps_dual = (dual.len() as f64).sqrt() * opts.eps_abs + opts.eps_rel * xtu_sq;
    let primal_norm = primal.norm();
    let dual_norm = dual.norm();
    StoppingCheck {
        stop: primal_norm <= eps_primal && dual_norm <= eps_dual,
        primal_norm,
        dual_norm,
        eps_primal,
        eps_dual,
    }
}

/// Exact minimizer of `rho_tau(r) + (rho/2) (c - r)^2`, i.e. the soft threshold
/// `S_{1/(2 rho)}(c - (2 tau - 1) / (2 rho))`.
#[inline]
pub fn residual_update(c: f64, tau: f64, rho: f64) -> f64 {
    shrink(c - (2.0 * tau - 1.0) / (2.0 * rho), 1.0 / (2.0 * rho))
}

/// Adaptive-lasso least squares on a fixed Gram matrix.
///
/// Minimizes `(rho/2) ||b - A theta||^2 + lambda sum_j w_j |theta_{u+j}|` where the
/// first `u` coefficients are unpenalized, given `G = A'A` and `h = A'b`.
pub struct PenalizedLs {
    gram: DMatrix<f64>,
    rho: f64,
    strengths: Vec<f64>,
    active: Vec<bool>,
    unpenalized: usize,
    zero: Vec<bool>,
}

/// Result of one penalized least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedLsSolution {
    pub coef: DVector<f64>,
    pub sweeps: usize,
    /// Active coordinates whose design column is zero; held at 0.
    pub zero_columns: Vec<usize>,
}

impl PenalizedLs {
    pub fn new(
        gram: DMatrix<f64>,
        rho: f64,
        lambda: f64,
        weights: &[f64],
        active: &[bool],
        unpenalized: usize,
    ) -> Result<Self> {
        let dim = gram.nrows();
        if gram.ncols() != dim || weights.len() + unpenalized != dim || active.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "gram {}x{}, {} weights, {} flags, {unpenalized} unpenalized",
                gram.nrows(),
                gram.ncols(),
                weights.len(),
                active.len()
            )));
        }
        let strengths = weights.iter().map(|w| lambda * w / rho).collect();
        let zero = (0..dim).map(|j| !(gram[(j, j)] > 0.0)).collect();
        Ok(Self { gram, rho, strengths, active: active.to_vec(), unpenalized, zero })
    }

    fn is_free(&self, j: usize) -> bool {
        !self.zero[j] && (j < self.unpenalized || self.active[j - self.unpenalized])
    }

    /// Cyclic coordinate descent from `warm` until the largest coordinate move
    /// drops below `tol` or `max_sweeps` is reached.
    pub fn solve(&self, h: &DVector<f64>, warm: &DVector<f64>, tol: f64, max_sweeps: usize) -> PenalizedLsSolution {
        let dim = self.gram.nrows();
        let mut coef = warm.clone();
        for j in 0..dim {
            if !self.is_free(j) {
                coef[j] = 0.0;
            }
        }
        // grad = G coef, kept current as coordinates move
        let mut gc = &self.gram * &coef;
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            sweeps += 1;
            let mut max_move = 0.0f64;
            for j in 0..dim {
                if !self.is_free(j) {
                    continue;
                }
                let gjj = self.gram[(j, j)];
                let partial = h[j] - (gc[j] - gjj * coef[j]);
                let next = if j < self.unpenalized {
                    partial / gjj
                } else {
                    shrink(partial, self.strengths[j - self.unpenalized]) / gjj
                };
                let delta = next - coef[j];
                if delta != 0.0 {
                    gc.axpy(delta, &self.gram.column(j), 1.0);
                    coef[j] = next;
                    max_move = max_move.max(delta.abs());
                }
            }
            if max_move < tol {
                break;
            }
        }
        let zero_columns = (0..dim)
            .filter(|&j| self.zero[j] && (j < self.unpenalized || self.active[j - self.unpenalized]))
            .collect();
        PenalizedLsSolution { coef, sweeps, zero_columns }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Minimizes `(rho/2) ||b - A theta||^2 + lambda sum_j w_j |theta_{u+j}|` over
/// active coefficients; inactive penalized coefficients are fixed at zero.
#[allow(clippy::too_many_arguments)]
pub fn penalized_ls(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rho: f64,
    lambda: f64,
    weights: &[f64],
    active: &[bool],
    unpenalized_count: usize,
    tol: f64,
) -> Result<PenalizedLsSolution> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!("A has {} rows, b has {}", a.nrows(), b.len())));
    }
    let solver = PenalizedLs::new(a.tr_mul(a), rho, lambda, weights, active, unpenalized_count)?;
    let h = a.tr_mul(b);
    Ok(solver.solve(&h, &DVector::zeros(a.ncols()), tol, 100_000))
}

enum CoefStep {
    Normal(SpdFactor),
    Penalized(PenalizedLs),
}

/// Fits QR (K = 1) or CQR by ADMM, with the adaptive-lasso penalty if given.
pub fn fit_admm(
    data: &Dataset,
    levels: &QuantileLevels,
    penalty: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<FitResult> {
    opts.validate()?;
    let weights = penalty.resolve(data.p())?;
    let op = Stacked::new(data, levels);
    let k = levels.len();
    let n = data.n();
    let rows = n * k;
    let rho = opts.rho;

    let ys = DVector::from_fn(rows, |r, _| data.y()[r % n]);
    let taus: Vec<f64> = (0..rows).map(|r| levels.as_slice()[r / n]).collect();

    let mut diagnostics = Diagnostics::default();
    let step = match &weights {
        None => {
            let f = SpdFactor::new(op.gram())?;
            diagnostics.ridge_fallback = f.ridge > 0.0;
            CoefStep::Normal(f)
        }
        Some(w) => CoefStep::Penalized(PenalizedLs::new(op.gram(), rho, w.lambda, &w.weights, &w.active, k)?),
    };
    let zero_cols = zero_columns(data.x());

    let mut state = AdmmState {
        theta: DVector::zeros(op.cols()),
        r: ys.clone(),
        r_prev: ys.clone(),
        u: DVector::zeros(rows),
        iteration: 0,
        regularized: weights.is_some(),
    };
    let mut converged = false;
    let inner_tol = opts.tol / 10.0;

    while state.iteration < opts.max_iter {
        state.iteration += 1;
        let xtheta = op.apply(&state.theta);
        let mut r_next = DVector::zeros(rows);
        for i in 0..rows {
            let c = ys[i] - xtheta[i] + state.u[i] / rho;
            r_next[i] = residual_update(c, taus[i], rho);
        }
        let target = &ys - &r_next + &state.u / rho;
        let h = op.apply_t(&target);
        state.theta = match &step {
            CoefStep::Normal(f) => f.solve(&h),
            CoefStep::Penalized(pls) => pls.solve(&h, &state.theta, inner_tol, INNER_SWEEPS).coef,
        };
        let xtheta = op.apply(&state.theta);
        state.u += (&ys - &r_next - &xtheta) * rho;
        state.r_prev = std::mem::replace(&mut state.r, r_next);

        if !state.theta.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!(
                "ADMM iterate became non-finite at iteration {}",
                state.iteration
            )));
        }
        if check_residuals(&state, &op, ys.as_slice(), opts).stop {
            converged = true;
            break;
        }
    }

    let intercepts = state.theta.as_slice()[..k].to_vec();
    let mut beta = state.theta.as_slice()[k..].to_vec();
    for &j in &zero_cols {
        beta[j] = 0.0;
    }
    diagnostics.skipped_coordinates = zero_cols;
    let objective = final_objective(data, levels, weights.as_ref(), &intercepts, &beta);
    let iterations = state.iteration;
    diagnostics.admm = Some(state);
    Ok(FitResult {
        intercepts,
        coefficients: beta,
        iterations,
        converged,
        objective,
        algorithm: Algorithm::Admm,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::stack_composite;
    use crate::loss::rho as check;
    use proptest::prelude::*;

    fn grid_argmin(c: f64, tau: f64, rho: f64) -> f64 {
        let f = |r: f64| check(r, tau) + 0.5 * rho * (c - r).powi(2);
        let (lo, hi, steps) = (c - 5.0, c + 5.0, 200_000);
        let h = (hi - lo) / steps as f64;
        let mut best = (f64::INFINITY, lo);
        for s in 0..=steps {
            let r = lo + s as f64 * h;
            let v = f(r);
            if v < best.0 {
                best = (v, r);
            }
        }
        // zero is a kink and must be examined exactly
        if f(0.0) <= best.0 {
            best = (f(0.0), 0.0);
        }
        best.1
    }

    proptest! {
        #[test]
        fn residual_update_minimizes_subproblem(c in -3f64..3.0, tau in 0.05f64..0.95, rho in 0.3f64..5.0) {
            let closed = residual_update(c, tau, rho);
            let grid = grid_argmin(c, tau, rho);
            prop_assert!((closed - grid).abs() <= 1e-4, "closed {} grid {}", closed, grid);
        }
    }

    #[test]
    fn penalized_ls_lambda_zero_is_ols() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.5, 1.0, -1.0, 1.0, 2.0, 1.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, -1.0, 0.5]);
        let sol = penalized_ls(&a, &b, 1.0, 0.0, &[1.0], &[true], 1, 1e-13).unwrap();
        let ols = (a.transpose() * &a).cholesky().unwrap().solve(&(a.transpose() * &b));
        assert!((sol.coef - ols).norm() < 1e-9);
    }

    #[test]
    fn penalized_ls_identity_design_is_soft_threshold() {
        let a = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![1.5, -0.2, -3.0]);
        let (lambda, w) = (0.7, [1.0, 2.0, 0.5]);
        let sol = penalized_ls(&a, &b, 1.0, lambda, &w, &[true; 3], 0, 1e-14).unwrap();
        for j in 0..3 {
            // per-coordinate grid search on 0.5 (b - t)^2 + lambda w |t|
            let f = |t: f64| 0.5 * (b[j] - t).powi(2) + lambda * w[j] * t.abs();
            let mut best = (f64::INFINITY, 0.0);
            for s in -400_000..=400_000 {
                let t = s as f64 * 1e-5;
                if f(t) < best.0 {
                    best = (f(t), t);
                }
            }
            assert!((sol.coef[j] - best.1).abs() < 2e-5);
            assert!((sol.coef[j] - shrink(b[j], lambda * w[j])).abs() < 1e-12);
        }
    }

    #[test]
    fn penalized_ls_inactive_coordinates_are_zero() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 2.0, 1.0, -1.0, 0.5, 1.0, 0.3, -2.0]);
        let b = DVector::from_vec(vec![3.0, 1.0, -2.0]);
        let sol = penalized_ls(&a, &b, 1.0, 0.5, &[1.0, 1.0], &[false, false], 1, 1e-12).unwrap();
        assert_eq!(sol.coef[1], 0.0);
        assert_eq!(sol.coef[2], 0.0);
        let mean = b.sum() / 3.0;
        assert!((sol.coef[0] - mean).abs() < 1e-10);
    }

    #[test]
    fn penalized_ls_flags_zero_column() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 3.0]);
        let sol = penalized_ls(&a, &b, 1.0, 0.1, &[1.0], &[true], 1, 1e-12).unwrap();
        assert_eq!(sol.zero_columns, vec![1]);
        assert_eq!(sol.coef[1], 0.0);
    }

    fn line_data(n: usize) -> Dataset {
        let x = DMatrix::from_fn(n, 1, |i, _| i as f64 / 4.0 - 2.0);
        let y = DVector::from_fn(n, |i, _| 2.0 * (i as f64 / 4.0 - 2.0));
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn intercept_only_median() {
        let data = Dataset::new(DMatrix::zeros(3, 0), DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
        let levels = QuantileLevels::single(0.5).unwrap();
        // the default thresholds only pin b0 to about 1e-2
        let res = fit_admm(&data, &levels, &PenaltySpec::None, &SolverOptions::new(Algorithm::Admm)).unwrap();
        assert!(res.converged);
        assert!((res.intercepts[0] - 2.0).abs() < 2e-2, "{:?}", res.intercepts);
        let tight = SolverOptions { eps_abs: 1e-7, eps_rel: 1e-9, ..SolverOptions::new(Algorithm::Admm) };
        let res = fit_admm(&data, &levels, &PenaltySpec::None, &tight).unwrap();
        assert!(res.converged);
        assert!((res.intercepts[0] - 2.0).abs() < 1e-4, "{:?}", res.intercepts);
    }

    #[test]
    fn exact_line() {
        let data = line_data(20);
        let levels = QuantileLevels::single(0.5).unwrap();
        let mut opts = SolverOptions::new(Algorithm::Admm);
        opts.eps_abs = 1e-6;
        opts.eps_rel = 1e-8;
        opts.max_iter = 50_000;
        let res = fit_admm(&data, &levels, &PenaltySpec::None, &opts).unwrap();
        assert!((res.coefficients[0] - 2.0).abs() < 1e-4, "{:?}", res.coefficients);
        assert!(res.intercepts[0].abs() < 1e-4);
        assert!(res.objective <= 1e-6, "objective {}", res.objective);
    }

    #[test]
    fn stopping_zero_dual_when_r_unchanged() {
        let data = line_data(6);
        let levels = QuantileLevels::single(0.5).unwrap();
        let design = stack_composite(&data, &levels);
        let theta = DVector::from_vec(vec![0.0, 2.0]);
        let r = &design.ys - &design.xs * &theta;
        let state = AdmmState {
            theta,
            r: r.clone(),
            r_prev: r,
            u: DVector::zeros(6),
            iteration: 1,
            regularized: false,
        };
        let check = admm_stopping(&state, &design, &SolverOptions::default());
        assert_eq!(check.dual_norm, 0.0);
        assert!(check.primal_norm < 1e-12);
        assert!(check.stop);
    }

    #[test]
    fn stopping_matches_independent_recomputation() {
        let x = DMatrix::from_fn(7, 2, |i, j| ((i * 3 + j * 5) % 7) as f64 / 3.0 - 1.0);
        let y = DVector::from_fn(7, |i, _| (i as f64).cos());
        let data = Dataset::new(x, y).unwrap();
        let levels = QuantileLevels::new(vec![0.25, 0.75]).unwrap();
        let d = stack_composite(&data, &levels);
        let rows = d.xs.nrows();
        let state = AdmmState {
            theta: DVector::from_fn(4, |i, _| 0.3 * i as f64 - 0.2),
            r: DVector::from_fn(rows, |i, _| (i as f64 * 0.7).sin()),
            r_prev: DVector::from_fn(rows, |i, _| (i as f64 * 0.3).cos()),
            u: DVector::from_fn(rows, |i, _| 0.1 * i as f64 - 0.5),
            iteration: 3,
            regularized: false,
        };
        let opts = SolverOptions::default();
        for regularized in [false, true] {
            let st = AdmmState { regularized, ..state.clone() };
            let got = admm_stopping(&st, &d, &opts);

            // independent element-wise evaluation of the displayed formulas
            let mut primal = 0.0;
            let mut xb_sq = 0.0;
            let mut xcov_sq = 0.0;
            let mut y_sq = 0.0;
            let mut by_sq = 0.0;
            for i in 0..rows {
                let mut fit = 0.0;
                let mut cov = 0.0;
                for j in 0..4 {
                    fit += d.xs[(i, j)] * st.theta[j];
                    if j >= 2 {
                        cov += d.xs[(i, j)] * st.theta[j];
                    }
                }
                primal += (d.ys[i] - fit - st.r[i]).powi(2);
                xb_sq += fit * fit;
                xcov_sq += cov * cov;
                y_sq += d.ys[i].powi(2);
                by_sq += (st.theta[i / 7] - d.ys[i]).powi(2);
            }
            let cols: Vec<usize> = if regularized { vec![2, 3] } else { vec![0, 1, 2, 3] };
            let mut dual = 0.0;
            let mut xtu = 0.0;
            for j in 0..4 {
                let mut dj = 0.0;
                let mut uj = 0.0;
                for i in 0..rows {
                    dj += d.xs[(i, j)] * (st.r[i] - st.r_prev[i]);
                    uj += d.xs[(i, j)] * st.u[i];
                }
                if cols.contains(&j) {
                    dual += (opts.rho * dj).powi(2);
                }
                xtu += uj * uj;
            }
            let r_sq: f64 = st.r.iter().map(|v| v * v).sum();
            let m = if regularized { xcov_sq.max(r_sq).max(by_sq) } else { xb_sq.max(r_sq).max(y_sq) };
            let eps_p = (rows as f64).sqrt() * opts.eps_abs + opts.eps_rel * m;
            let eps_d = (cols.len() as f64).sqrt() * opts.eps_abs + opts.eps_rel * xtu;
            assert!((got.primal_norm - primal.sqrt()).abs() < 1e-12);
            assert!((got.dual_norm - dual.sqrt()).abs() < 1e-12);
            assert!((got.eps_primal - eps_p).abs() < 1e-12);
            assert!((got.eps_dual - eps_d).abs() < 1e-12);
        }
    }
}
