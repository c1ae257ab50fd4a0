//! Two-stage adaptive fitting: pilot fit, adaptive weights, penalized fit.

use nalgebra::DVector;

use crate::error::{Error, Result, Stage};
use crate::penalty::PenaltySpec;
use crate::solvers;
use crate::types::{Algorithm, Dataset, FitResult, QuantileLevels, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct FitRequest {
    pub data: Dataset,
    pub levels: QuantileLevels,
    /// `Some(lambda)` requests the adaptive-lasso fit.
    pub lambda: Option<f64>,
    /// Solver for the final stage; `options.algorithm` is overridden by it.
    pub algorithm: Algorithm,
    pub options: SolverOptions,
    /// Solver for the unpenalized pilot fit. Defaults to `algorithm`.
    pub pilot_algorithm: Option<Algorithm>,
}

impl FitRequest {
    pub fn unregularized(data: Dataset, levels: QuantileLevels, options: SolverOptions) -> Self {
        Self { data, levels, lambda: None, algorithm: options.algorithm, options, pilot_algorithm: None }
    }

    pub fn regularized(data: Dataset, levels: QuantileLevels, lambda: f64, options: SolverOptions) -> Self {
        Self { lambda: Some(lambda), ..Self::unregularized(data, levels, options) }
    }

    pub fn with_pilot_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.pilot_algorithm = Some(algorithm);
        self
    }

    pub fn is_regularized(&self) -> bool {
        self.lambda.is_some()
    }

    fn validate(&self) -> Result<()> {
        if let Some(lambda) = self.lambda {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::Config(format!("lambda must be positive and finite, got {lambda}")));
            }
        }
        self.options.validate()
    }
}

/// Fits the request. Unregularized requests go straight to the solver; a
/// regularized request first fits the unpenalized pilot, whose coefficients
/// define the adaptive weights, and records it in the diagnostics.
///
/// A pilot that fails to converge is an error; a final fit that fails to
/// converge is returned with `converged == false`.
pub fn fit(req: &FitRequest) -> Result<FitResult> {
    req.validate()?;
    let opts = req.options.clone().with_algorithm(req.algorithm);
    let Some(lambda) = req.lambda else {
        return solvers::solve(&req.data, &req.levels, &PenaltySpec::None, &opts);
    };

    let pilot_opts = opts.clone().with_algorithm(req.pilot_algorithm.unwrap_or(req.algorithm));
    let pilot = solvers::solve(&req.data, &req.levels, &PenaltySpec::None, &pilot_opts)?;
    if !pilot.converged {
        return Err(Error::NotConverged { stage: Stage::Pilot, iterations: pilot.iterations });
    }
    let penalty = PenaltySpec::adaptive(lambda, DVector::from_vec(pilot.coefficients.clone()));
    let mut result = solvers::solve(&req.data, &req.levels, &penalty, &opts)?;
    result.diagnostics.pilot = Some(pilot.coefficients);
    Ok(result)
}
