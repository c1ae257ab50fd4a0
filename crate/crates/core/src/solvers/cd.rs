//! Coordinate descent with weighted-median coordinate moves.
//!
//! For fixed coefficients each intercept is replaced by the lower sample
//! quantile of `y - X beta` at its level. For covariate `m` the loss is written
//! as `sum_ik |x_im| |z_ik - beta_m| Theta_ik` with breakpoints
//! `z_ik = (y_i - b_k - sum_{j != m} x_ij beta_j) / x_im` and `Theta_ik` the
//! check-loss slope on the current side of zero (`tau_k` when `r_ik >= 0`,
//! `1 - tau_k` otherwise). The adaptive-lasso term enters as one extra
//! breakpoint at zero with weight `lambda w_m`. The weighted median of the
//! breakpoints is the candidate; it is kept only if the full objective does not
//! increase.
//!
//! The weighted-median candidate can sit still at a breakpoint that is not the
//! coordinate minimizer (a zero residual is weighted as if it stayed on the
//! nonnegative side). When a sweep would otherwise converge, one more pass
//! moves each covariate to its exact line minimizer, so the fit only stops at
//! coordinatewise minima.
//!
//! Covariates are visited in an order fixed by their column values rather than
//! their positions, so relabelling the columns relabels the fit exactly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::loss::rho;
use crate::order::{select_quantile, weighted_median_in_place};
use crate::penalty::{AdaptiveWeights, PenaltySpec};
use crate::solvers::zero_columns;
use crate::types::{Algorithm, Dataset, Diagnostics, FitResult, QuantileLevels, SolverOptions};

/// Coordinate-descent iterate with cached residuals and objective.
#[derive(Debug, Clone, PartialEq)]
pub struct CdState {
    pub beta: Vec<f64>,
    pub intercepts: Vec<f64>,
    /// `residuals[(i, k)] = y_i - b_k - x_i' beta`.
    pub residuals: DMatrix<f64>,
    pub objective: f64,
}

impl CdState {
    pub fn new(
        data: &Dataset,
        levels: &QuantileLevels,
        weights: Option<&AdaptiveWeights>,
        intercepts: Vec<f64>,
        beta: Vec<f64>,
    ) -> Self {
        let xb = data.x() * DVector::from_column_slice(&beta);
        let y = data.y();
        let residuals = DMatrix::from_fn(data.n(), levels.len(), |i, k| y[i] - intercepts[k] - xb[i]);
        let mut s = Self { beta, intercepts, residuals, objective: 0.0 };
        s.objective = s.evaluate(levels.as_slice(), weights);
        s
    }

    fn evaluate(&self, levels: &[f64], weights: Option<&AdaptiveWeights>) -> f64 {
        let mut total = 0.0;
        for (k, &tau) in levels.iter().enumerate() {
            total += self.residuals.column(k).iter().map(|&r| rho(r, tau)).sum::<f64>();
        }
        total + weights.map_or(0.0, |w| w.value(&self.beta))
    }
}

/// Outcome of one safeguarded update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateOutcome {
    pub candidate: f64,
    pub accepted: bool,
    pub before: f64,
    pub after: f64,
}

/// Lower sample quantile of `y_i - x_i' beta` at level `tau_k`.
pub fn cd_intercept_update(state: &CdState, levels: &QuantileLevels, k: usize) -> f64 {
    let b = state.intercepts[k];
    let mut v: Vec<f64> = state.residuals.column(k).iter().map(|r| r + b).collect();
    select_quantile(&mut v, levels.as_slice()[k])
}

/// Weighted-median candidate for covariate `m`. `None` when column `m` is zero
/// and no penalty breakpoint exists.
pub fn cd_coordinate_candidate(
    state: &CdState,
    data: &Dataset,
    levels: &QuantileLevels,
    weights: Option<&AdaptiveWeights>,
    m: usize,
) -> Option<f64> {
    let mut buf = Vec::new();
    coordinate_candidate(state, data.x(), levels.as_slice(), weights, m, &mut buf)
}

fn coordinate_candidate(
    state: &CdState,
    x: &DMatrix<f64>,
    levels: &[f64],
    weights: Option<&AdaptiveWeights>,
    m: usize,
    buf: &mut Vec<(f64, f64)>,
) -> Option<f64> {
    buf.clear();
    let bm = state.beta[m];
    let col = x.column(m);
    for (k, &tau) in levels.iter().enumerate() {
        let res = state.residuals.column(k);
        for (i, &xim) in col.iter().enumerate() {
            if xim == 0.0 {
                continue;
            }
            let r = res[i];
            let theta = if r >= 0.0 { tau } else { 1.0 - tau };
            buf.push((bm + r / xim, xim.abs() * theta));
        }
    }
    if let Some(w) = weights {
        buf.push((0.0, w.strength(m)));
    }
    weighted_median_in_place(buf)
}

fn apply_intercept(state: &mut CdState, k: usize, value: f64) {
    let delta = value - state.intercepts[k];
    state.intercepts[k] = value;
    state.residuals.column_mut(k).add_scalar_mut(-delta);
}

fn apply_coordinate(state: &mut CdState, x: &DMatrix<f64>, m: usize, value: f64) {
    let delta = value - state.beta[m];
    state.beta[m] = value;
    let col = x.column(m);
    for k in 0..state.residuals.ncols() {
        state.residuals.column_mut(k).axpy(-delta, &col, 1.0);
    }
}

/// Replaces `b_k` by its sample-quantile update unless that would raise the
/// objective.
pub fn cd_intercept_step(
    state: &mut CdState,
    levels: &QuantileLevels,
    weights: Option<&AdaptiveWeights>,
    k: usize,
) -> UpdateOutcome {
    let candidate = cd_intercept_update(state, levels, k);
    let before = state.objective;
    let old = state.intercepts[k];
    let saved = state.residuals.column(k).clone_owned();
    apply_intercept(state, k, candidate);
    let after = state.evaluate(levels.as_slice(), weights);
    if after <= before {
        state.objective = after;
        UpdateOutcome { candidate, accepted: true, before, after }
    } else {
        state.intercepts[k] = old;
        state.residuals.set_column(k, &saved);
        UpdateOutcome { candidate, accepted: false, before, after: before }
    }
}

/// Safeguarded weighted-median update of covariate `m`.
pub fn cd_coordinate_update(
    state: &mut CdState,
    data: &Dataset,
    levels: &QuantileLevels,
    weights: Option<&AdaptiveWeights>,
    m: usize,
) -> Option<UpdateOutcome> {
    let mut buf = Vec::new();
    coordinate_step(state, data.x(), levels.as_slice(), weights, m, &mut buf)
}

fn coordinate_step(
    state: &mut CdState,
    x: &DMatrix<f64>,
    levels: &[f64],
    weights: Option<&AdaptiveWeights>,
    m: usize,
    buf: &mut Vec<(f64, f64)>,
) -> Option<UpdateOutcome> {
    let candidate = coordinate_candidate(state, x, levels, weights, m, buf)?;
    let before = state.objective;
    let old = state.beta[m];
    if candidate == old {
        return Some(UpdateOutcome { candidate, accepted: true, before, after: before });
    }
    // keep the residuals so a rejected move is undone exactly
    let saved = state.residuals.clone();
    apply_coordinate(state, x, m, candidate);
    let after = state.evaluate(levels, weights);
    if after <= before {
        state.objective = after;
        Some(UpdateOutcome { candidate, accepted: true, before, after })
    } else {
        state.beta[m] = old;
        state.residuals = saved;
        Some(UpdateOutcome { candidate, accepted: false, before, after: before })
    }
}

/// Exact minimizer of the objective along covariate `m`. Each observation
/// contributes `a rho_t(z - beta_m)` with `a = |x_im|` and `t = tau` or
/// `1 - tau` by the sign of `x_im`; the penalty is a breakpoint at zero with
/// `a = 2 lambda w_m`, `t = 1/2`. The minimizer is the first breakpoint where
/// the cumulative `a` reaches `sum a t`.
fn exact_coordinate(
    state: &CdState,
    x: &DMatrix<f64>,
    levels: &[f64],
    weights: Option<&AdaptiveWeights>,
    m: usize,
    buf: &mut Vec<(f64, f64, f64)>,
) -> Option<f64> {
    buf.clear();
    let bm = state.beta[m];
    let col = x.column(m);
    for (k, &tau) in levels.iter().enumerate() {
        let res = state.residuals.column(k);
        for (i, &xim) in col.iter().enumerate() {
            if xim != 0.0 {
                let t = if xim > 0.0 { tau } else { 1.0 - tau };
                buf.push((bm + res[i] / xim, xim.abs(), t));
            }
        }
    }
    if let Some(w) = weights {
        let s = w.strength(m);
        if s > 0.0 {
            buf.push((0.0, 2.0 * s, 0.5));
        }
    }
    if buf.is_empty() {
        return None;
    }
    let target: f64 = buf.iter().map(|(_, a, t)| a * t).sum();
    buf.sort_by(|l, r| l.0.total_cmp(&r.0));
    let mut cum = 0.0;
    for &(z, a, _) in buf.iter() {
        cum += a;
        if cum >= target {
            return Some(z);
        }
    }
    buf.last().map(|b| b.0)
}

fn exact_step(
    state: &mut CdState,
    x: &DMatrix<f64>,
    levels: &[f64],
    weights: Option<&AdaptiveWeights>,
    m: usize,
    buf: &mut Vec<(f64, f64, f64)>,
) -> Option<UpdateOutcome> {
    let candidate = exact_coordinate(state, x, levels, weights, m, buf)?;
    let before = state.objective;
    let old = state.beta[m];
    if candidate == old {
        return Some(UpdateOutcome { candidate, accepted: true, before, after: before });
    }
    let saved = state.residuals.clone();
    apply_coordinate(state, x, m, candidate);
    let after = state.evaluate(levels, weights);
    if after < before {
        state.objective = after;
        Some(UpdateOutcome { candidate, accepted: true, before, after })
    } else {
        state.beta[m] = old;
        state.residuals = saved;
        Some(UpdateOutcome { candidate, accepted: false, before, after: before })
    }
}

/// Column visiting order: by squared norm, then sum, then values; position
/// only breaks ties between identical columns.
fn visiting_order(x: &DMatrix<f64>) -> Vec<usize> {
    let key = |j: usize| {
        let c = x.column(j);
        (c.norm_squared(), c.sum())
    };
    let mut order: Vec<usize> = (0..x.ncols()).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then_with(|| {
                x.column(a)
                    .iter()
                    .zip(x.column(b).iter())
                    .map(|(u, v)| u.total_cmp(v))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then(a.cmp(&b))
    });
    order
}

/// Fits QR or CQR by coordinate descent. Each sweep updates every intercept
/// then every covariate; stops when the largest parameter move in
/// a sweep is below `opts.tol`.
pub fn fit_cd(
    data: &Dataset,
    levels: &QuantileLevels,
    penalty: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<FitResult> {
    opts.validate()?;
    let weights = penalty.resolve(data.p())?;
    let w = weights.as_ref();
    let (p, k) = (data.p(), levels.len());
    let zero_cols = zero_columns(data.x());
    let skip: Vec<bool> = (0..p)
        .map(|j| zero_cols.contains(&j) || w.is_some_and(|w| !w.active[j]))
        .collect();

    let order: Vec<usize> = visiting_order(data.x()).into_iter().filter(|&m| !skip[m]).collect();
    let mut state = CdState::new(data, levels, w, vec![0.0; k], vec![0.0; p]);
    let mut diagnostics = Diagnostics { skipped_coordinates: zero_cols, ..Default::default() };
    let mut buf = Vec::with_capacity(data.n() * k + 1);
    let mut exact_buf = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < opts.max_iter {
        sweeps += 1;
        let mut max_move = 0.0f64;
        for kk in 0..k {
            let old = state.intercepts[kk];
            let out = cd_intercept_step(&mut state, levels, w, kk);
            max_move = max_move.max((state.intercepts[kk] - old).abs());
            if opts.trace {
                diagnostics.descent.push((out.before, out.after));
            }
        }
        for &m in &order {
            let old = state.beta[m];
            if let Some(out) = coordinate_step(&mut state, data.x(), levels.as_slice(), w, m, &mut buf) {
                max_move = max_move.max((state.beta[m] - old).abs());
                if opts.trace {
                    diagnostics.descent.push((out.before, out.after));
                }
            }
        }
        if !state.objective.is_finite() {
            return Err(Error::Numerical(format!("CD objective became non-finite in sweep {sweeps}")));
        }
        if max_move < opts.tol {
            for &m in &order {
                let old = state.beta[m];
                if let Some(out) = exact_step(&mut state, data.x(), levels.as_slice(), w, m, &mut exact_buf) {
                    max_move = max_move.max((state.beta[m] - old).abs());
                    if opts.trace {
                        diagnostics.descent.push((out.before, out.after));
                    }
                }
            }
            if max_move < opts.tol {
                converged = true;
                break;
            }
        }
    }

    Ok(FitResult {
        objective: state.evaluate(levels.as_slice(), w),
        intercepts: state.intercepts,
        coefficients: state.beta,
        iterations: sweeps,
        converged,
        algorithm: Algorithm::Cd,
        diagnostics,
    })
}
