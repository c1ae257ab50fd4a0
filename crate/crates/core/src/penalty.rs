//! Adaptive-lasso penalty configuration and weights.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Pilot coefficients smaller than this in magnitude exclude their variable.
pub const PILOT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum PenaltySpec {
    None,
    /// `lambda * sum_j |beta_j| / pilot_j^2`. `pilot` may be left empty when the
    /// pipeline is expected to compute it.
    AdaptiveLasso {
        lambda: f64,
        pilot: Option<DVector<f64>>,
    },
}

impl PenaltySpec {
    pub fn adaptive(lambda: f64, pilot: DVector<f64>) -> Self {
        PenaltySpec::AdaptiveLasso { lambda, pilot: Some(pilot) }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, PenaltySpec::None)
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            PenaltySpec::None => Ok(()),
            PenaltySpec::AdaptiveLasso { lambda, pilot } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
                }
                if let Some(pilot) = pilot {
                    if pilot.len() != p {
                        return Err(Error::Dimension(format!(
                            "pilot has {} entries for {p} covariates",
                            pilot.len()
                        )));
                    }
                    if pilot.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Config("pilot coefficients must be finite".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// Resolves the penalty into per-coefficient weights. `None` for an
    /// unpenalized problem.
    pub fn resolve(&self, p: usize) -> Result<Option<AdaptiveWeights>> {
        self.validate(p)?;
        match self {
            PenaltySpec::None => Ok(None),
            PenaltySpec::AdaptiveLasso { lambda, pilot } => {
                let pilot = pilot.as_ref().ok_or_else(|| {
                    Error::Config("adaptive lasso requires pilot coefficients".into())
                })?;
                let (weights, active) = adaptive_weights(pilot.as_slice(), PILOT_FLOOR);
                Ok(Some(AdaptiveWeights { lambda: *lambda, weights, active }))
            }
        }
    }
}

/// Resolved adaptive-lasso penalty. Inactive coefficients are held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveWeights {
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub active: Vec<bool>,
}

impl AdaptiveWeights {
    /// Penalty strength `lambda * w_j` on coefficient `j`.
    pub fn strength(&self, j: usize) -> f64 {
        self.lambda * self.weights[j]
    }

    /// Value of the penalty at `beta`; infinite when an inactive coefficient is nonzero.
    pub fn value(&self, beta: &[f64]) -> f64 {
        beta.iter()
            .enumerate()
            .map(|(j, &b)| {
                if b == 0.0 {
                    0.0
                } else if self.active[j] {
                    self.strength(j) * b.abs()
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    }
}

/// Adaptive weights `1 / pilot_j^2`. Entries with `|pilot_j| < floor` are
/// marked inactive and get weight 0 (unused).
pub fn adaptive_weights(pilot: &[f64], floor: f64) -> (Vec<f64>, Vec<bool>) {
    pilot
        .iter()
        .map(|&b| if b.abs() >= floor { (1.0 / (b * b), true) } else { (0.0, false) })
        .unzip()
}
