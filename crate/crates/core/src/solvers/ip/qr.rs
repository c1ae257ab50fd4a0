use super::{solve_lp, LinearProgram, LpStatus, SparseMatrix};
use crate::error::{Error, Result};
use crate::penalty::PenaltySpec;
use crate::solvers::{final_objective, zero_columns};
use crate::types::{Algorithm, Dataset, Diagnostics, FitResult, QuantileLevels, SolverOptions};

/// Layout of the QR/CQR linear program.
///
/// Variables are ordered `[b_1..b_K, beta_active, u_1, v_1, .., u_K, v_K, beta*]`
/// where `u_k, v_k` have length n and `beta*` (penalized only) has one entry
/// per active covariate. Covariates that are inactive under the penalty or
/// identically zero are left out and map back to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    pub n: usize,
    pub levels: usize,
    pub p: usize,
    /// Covariate index of each LP coefficient variable.
    pub active: Vec<usize>,
    pub penalized: bool,
}

impl VariableMap {
    pub fn intercept(&self, k: usize) -> usize {
        k
    }

    pub fn coefficient(&self, t: usize) -> usize {
        self.levels + t
    }

    fn slack_base(&self) -> usize {
        self.levels + self.active.len()
    }

    pub fn u(&self, k: usize, i: usize) -> usize {
        self.slack_base() + 2 * k * self.n + i
    }

    pub fn v(&self, k: usize, i: usize) -> usize {
        self.slack_base() + (2 * k + 1) * self.n + i
    }

    pub fn beta_star(&self, t: usize) -> usize {
        self.slack_base() + 2 * self.levels * self.n + t
    }

    pub fn num_vars(&self) -> usize {
        self.slack_base() + 2 * self.levels * self.n + if self.penalized { self.active.len() } else { 0 }
    }

    /// `(intercepts, coefficients)` from an LP primal vector.
    pub fn extract(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let intercepts = (0..self.levels).map(|k| x[self.intercept(k)]).collect();
        let mut beta = vec![0.0; self.p];
        for (t, &j) in self.active.iter().enumerate() {
            beta[j] = x[self.coefficient(t)];
        }
        (intercepts, beta)
    }
}

/// Builds the check-loss LP; with an adaptive-lasso penalty the absolute
/// values are split through `beta <= beta*`, `-beta <= beta*`.
pub fn build_qr_lp(
    data: &Dataset,
    levels: &QuantileLevels,
    penalty: &PenaltySpec,
) -> Result<(LinearProgram, VariableMap)> {
    let (n, p, k) = (data.n(), data.p(), levels.len());
    let weights = penalty.resolve(p)?;
    let zero = zero_columns(data.x());
    let active: Vec<usize> = (0..p)
        .filter(|j| !zero.contains(j) && weights.as_ref().is_none_or(|w| w.active[*j]))
        .collect();
    let map = VariableMap { n, levels: k, p, active, penalized: weights.is_some() };
    let nv = map.num_vars();
    let (x, y) = (data.x(), data.y());

    let mut c = vec![0.0; nv];
    let mut lx = vec![f64::NEG_INFINITY; nv];
    let ux = vec![f64::INFINITY; nv];
    let mut lc = Vec::new();
    let mut uc = Vec::new();
    let mut trip = Vec::new();
    for (kk, &tau) in levels.as_slice().iter().enumerate() {
        for i in 0..n {
            let row = lc.len();
            trip.push((row, map.intercept(kk), 1.0));
            for (t, &j) in map.active.iter().enumerate() {
                trip.push((row, map.coefficient(t), x[(i, j)]));
            }
            let (u, v) = (map.u(kk, i), map.v(kk, i));
            trip.push((row, u, 1.0));
            trip.push((row, v, -1.0));
            c[u] = tau;
            c[v] = 1.0 - tau;
            lx[u] = 0.0;
            lx[v] = 0.0;
            lc.push(y[i]);
            uc.push(y[i]);
        }
    }
    if let Some(w) = &weights {
        for (t, &j) in map.active.iter().enumerate() {
            let s = map.beta_star(t);
            c[s] = w.strength(j);
            lx[s] = 0.0;
            for sign in [1.0, -1.0] {
                let row = lc.len();
                trip.push((row, map.coefficient(t), sign));
                trip.push((row, s, -1.0));
                lc.push(f64::NEG_INFINITY);
                uc.push(0.0);
            }
        }
    }
    let a = SparseMatrix::from_triplets(lc.len(), nv, &trip);
    Ok((LinearProgram { c, c0: 0.0, a, lc, uc, lx, ux }, map))
}

/// Solves QR/CQR (optionally adaptive-lasso penalized) as a linear program.
pub fn fit_ip(
    data: &Dataset,
    levels: &QuantileLevels,
    penalty: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<FitResult> {
    opts.validate()?;
    let weights = penalty.resolve(data.p())?;
    let (lp, map) = build_qr_lp(data, levels, penalty)?;
    let sol = solve_lp(&lp, opts)?;
    match sol.status {
        LpStatus::Optimal | LpStatus::MaxIter => {}
        status => return Err(Error::Lp(status)),
    }
    let (intercepts, coefficients) = map.extract(&sol.x);
    Ok(FitResult {
        objective: final_objective(data, levels, weights.as_ref(), &intercepts, &coefficients),
        intercepts,
        coefficients,
        iterations: sol.iterations,
        converged: sol.status == LpStatus::Optimal,
        algorithm: Algorithm::Ip,
        diagnostics: Diagnostics {
            skipped_coordinates: zero_columns(data.x()),
            lp_status: Some(sol.status),
            ..Default::default()
        },
    })
}
