use std::str::FromStr;
use std::time::Instant;

use cqreg::pipeline::{fit, FitRequest};
use cqreg::{Algorithm, Dataset, FitResult, QuantileLevels, SolverOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generate::{generate_data, generate_truth};
use crate::metrics::{coefficient_error, selection_counts};
use crate::SimError;

/// Share of failed fits above which a report row is flagged.
pub const FAILURE_FLAG_RATE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub true_support_size: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub levels: QuantileLevels,
    pub regularized: bool,
    /// Penalty level; `None` uses [`SimConfig::default_lambda`].
    pub lambda: Option<f64>,
    pub algorithms: Vec<Algorithm>,
    pub selection_threshold: f64,
    pub intercept: f64,
    /// Solver settings shared by every fit; the algorithm field is overridden.
    pub options: SolverOptions,
}

impl SimConfig {
    /// Dense, unregularized configuration with 50 replications.
    pub fn new(n: usize, p: usize, levels: QuantileLevels) -> Self {
        Self {
            n,
            p,
            true_support_size: p,
            reps: 50,
            base_seed: 0,
            levels,
            regularized: false,
            lambda: None,
            algorithms: vec![Algorithm::Admm, Algorithm::Mm, Algorithm::Cd],
            selection_threshold: 1e-3,
            intercept: 1.0,
            options: SolverOptions::default(),
        }
    }

    /// `sqrt(n log p) / 4`.
    pub fn default_lambda(n: usize, p: usize) -> f64 {
        (n as f64 * (p as f64).ln()).sqrt() / 4.0
    }

    /// The penalty level used, or `None` when unregularized.
    pub fn effective_lambda(&self) -> Option<f64> {
        self.regularized.then(|| self.lambda.unwrap_or_else(|| Self::default_lambda(self.n, self.p)))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        if self.n == 0 || self.reps == 0 {
            return bad("n and reps must be positive".into());
        }
        if self.true_support_size > self.p {
            return bad(format!("support size {} exceeds p = {}", self.true_support_size, self.p));
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms requested".into());
        }
        if !(self.selection_threshold >= 0.0 && self.selection_threshold.is_finite()) {
            return bad("selection threshold must be a finite nonnegative number".into());
        }
        if let Some(lambda) = self.effective_lambda() {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return bad(format!("lambda must be positive, got {lambda}"));
            }
        }
        self.options.validate().map_err(|e| SimError::Config(e.to_string()))
    }
}

/// The four experiment protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// QR at tau = 0.3, dense truth, 50 replications.
    QrNoreg,
    /// CQR at 0.1, ..., 0.9, dense truth, 50 replications.
    CqrNoreg,
    /// Adaptive-lasso QR at tau = 0.3, 4 true predictors, 25 replications.
    QrReg,
    /// Adaptive-lasso CQR at 0.1, ..., 0.9, 4 true predictors, 25 replications.
    CqrReg,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::QrNoreg, Preset::CqrNoreg, Preset::QrReg, Preset::CqrReg];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::QrNoreg => "qr-noreg",
            Preset::CqrNoreg => "cqr-noreg",
            Preset::QrReg => "qr-reg",
            Preset::CqrReg => "cqr-reg",
        }
    }

    pub fn config(self, n: usize, p: usize) -> SimConfig {
        let levels = match self {
            Preset::QrNoreg | Preset::QrReg => QuantileLevels::single(0.3),
            Preset::CqrNoreg | Preset::CqrReg => QuantileLevels::equally_spaced(9),
        }
        .expect("preset levels are valid");
        let mut cfg = SimConfig::new(n, p, levels);
        if matches!(self, Preset::QrReg | Preset::CqrReg) {
            cfg.regularized = true;
            cfg.true_support_size = p.min(4);
            cfg.reps = 25;
        }
        cfg
    }
}

impl FromStr for Preset {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| SimError::Config(format!("unknown preset '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub n: usize,
    pub p: usize,
    pub algorithm: Algorithm,
    pub mean_error: f64,
    #[serde(rename = "mean_N_T")]
    pub mean_n_t: f64,
    #[serde(rename = "mean_N_F")]
    pub mean_n_f: f64,
    pub mean_seconds: f64,
    /// Replications attempted.
    pub reps: usize,
    /// Fits that errored or did not converge; excluded from the means.
    pub failures: usize,
}

impl SimRow {
    pub fn flagged(&self) -> bool {
        self.failures as f64 > FAILURE_FLAG_RATE * self.reps as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub levels: Vec<f64>,
    pub lambda: Option<f64>,
    pub base_seed: u64,
    pub intercept: f64,
    pub true_support_size: usize,
    pub selection_threshold: f64,
    pub rows: Vec<SimRow>,
}

impl SimReport {
    pub fn row(&self, algorithm: Algorithm) -> Option<&SimRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }
}

/// One fit as seen by an inspection hook.
pub struct FitRecord<'a> {
    pub rep: usize,
    pub algorithm: Algorithm,
    pub data: &'a Dataset,
    pub levels: &'a QuantileLevels,
    pub truth: &'a [f64],
    pub result: &'a cqreg::Result<FitResult>,
}

struct Outcome {
    error: f64,
    n_t: usize,
    n_f: usize,
    seconds: f64,
}

/// Runs every replication and algorithm in `config` and averages the metrics.
pub fn run_experiment(config: &SimConfig) -> Result<SimReport, SimError> {
    run_experiment_inspect(config, |_| {})
}

/// As [`run_experiment`], calling `inspect` on every fit. Replications run in
/// parallel, so `inspect` may be called concurrently and in any order; the
/// report itself does not depend on scheduling.
pub fn run_experiment_inspect<F>(config: &SimConfig, inspect: F) -> Result<SimReport, SimError>
where
    F: Fn(&FitRecord<'_>) + Sync,
{
    config.validate()?;
    let lambda = config.effective_lambda();
    let per_rep: Vec<Vec<Option<Outcome>>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| run_rep(config, lambda, rep, &inspect))
        .collect();

    let rows = config
        .algorithms
        .iter()
        .enumerate()
        .map(|(a, &algorithm)| {
            let done: Vec<&Outcome> = per_rep.iter().filter_map(|r| r[a].as_ref()).collect();
            let mean = |f: &dyn Fn(&Outcome) -> f64| {
                if done.is_empty() {
                    f64::NAN
                } else {
                    done.iter().map(|o| f(o)).sum::<f64>() / done.len() as f64
                }
            };
            SimRow {
                n: config.n,
                p: config.p,
                algorithm,
                mean_error: mean(&|o| o.error),
                mean_n_t: mean(&|o| o.n_t as f64),
                mean_n_f: mean(&|o| o.n_f as f64),
                mean_seconds: mean(&|o| o.seconds),
                reps: config.reps,
                failures: config.reps - done.len(),
            }
        })
        .collect();

    Ok(SimReport {
        levels: config.levels.as_slice().to_vec(),
        lambda,
        base_seed: config.base_seed,
        intercept: config.intercept,
        true_support_size: config.true_support_size,
        selection_threshold: config.selection_threshold,
        rows,
    })
}

fn run_rep<F>(config: &SimConfig, lambda: Option<f64>, rep: usize, inspect: &F) -> Vec<Option<Outcome>>
where
    F: Fn(&FitRecord<'_>) + Sync,
{
    let seed = config.base_seed.wrapping_add(rep as u64);
    let truth = generate_truth(config.p, config.true_support_size, seed);
    let data = generate_data(config.n, config.p, &truth, config.intercept, seed);
    config
        .algorithms
        .iter()
        .map(|&algorithm| {
            let options = config.options.clone().with_algorithm(algorithm);
            let req = match lambda {
                Some(l) => FitRequest::regularized(data.clone(), config.levels.clone(), l, options),
                None => FitRequest::unregularized(data.clone(), config.levels.clone(), options),
            };
            let start = Instant::now();
            let result = fit(&req);
            let seconds = start.elapsed().as_secs_f64();
            inspect(&FitRecord {
                rep,
                algorithm,
                data: &data,
                levels: &config.levels,
                truth: truth.as_slice(),
                result: &result,
            });
            let fit = result.ok().filter(|f| f.converged)?;
            let (n_t, n_f) = selection_counts(&fit.coefficients, truth.as_slice(), config.selection_threshold);
            Some(Outcome {
                error: coefficient_error(&fit.coefficients, truth.as_slice()).ok()?,
                n_t,
                n_f,
                seconds,
            })
        })
        .collect()
}
