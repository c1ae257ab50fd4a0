//! Domain types shared by every solver.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::admm::AdmmState;
use crate::solvers::ip::LpStatus;

/// A regression problem: covariates `x` (n x p, no intercept column) and
/// response `y` (length n).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidData("at least one observation is required".into()));
        }
        if x.nrows() != y.len() {
            return Err(Error::InvalidData(format!(
                "design has {} rows but response has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("response entry {i} is not finite")));
        }
        for j in 0..x.ncols() {
            if let Some(i) = x.column(j).iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "covariate entry at row {i}, column {j} is not finite"
                )));
            }
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Dataset with covariate columns reordered so that new column `j` is old
    /// column `order[j]`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.p() {
            return Err(Error::Dimension(format!(
                "permutation has {} entries for {} columns",
                order.len(),
                self.p()
            )));
        }
        let x = DMatrix::from_fn(self.n(), self.p(), |i, j| self.x[(i, order[j])]);
        Ok(Self { x, y: self.y.clone() })
    }
}

/// Strictly increasing quantile levels in (0, 1). One level is plain QR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantileLevels(Vec<f64>);

impl QuantileLevels {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidLevels("at least one level is required".into()));
        }
        for &t in &levels {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidLevels(format!("level {t} is outside (0, 1)")));
            }
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLevels("levels must be strictly increasing".into()));
        }
        Ok(Self(levels))
    }

    pub fn single(tau: f64) -> Result<Self> {
        Self::new(vec![tau])
    }

    /// `count` equally spaced levels `1/(count+1), ..., count/(count+1)`.
    pub fn equally_spaced(count: usize) -> Result<Self> {
        let step = 1.0 / (count as f64 + 1.0);
        Self::new((1..=count).map(|k| k as f64 * step).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_composite(&self) -> bool {
        self.0.len() > 1
    }
}

impl TryFrom<Vec<f64>> for QuantileLevels {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuantileLevels> for Vec<f64> {
    fn from(l: QuantileLevels) -> Self {
        l.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Admm,
    Mm,
    Cd,
    Ip,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Admm, Algorithm::Mm, Algorithm::Cd, Algorithm::Ip];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Admm => "admm",
            Algorithm::Mm => "mm",
            Algorithm::Cd => "cd",
            Algorithm::Ip => "ip",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "admm" => Ok(Algorithm::Admm),
            "mm" => Ok(Algorithm::Mm),
            "cd" => Ok(Algorithm::Cd),
            "ip" => Ok(Algorithm::Ip),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Tuning knobs shared by all solvers. Each solver reads the subset it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub algorithm: Algorithm,
    pub max_iter: usize,
    /// Coefficient-change tolerance for MM and CD; inner tolerance scale for ADMM.
    pub tol: f64,
    /// ADMM augmented-Lagrangian penalty.
    pub rho: f64,
    /// MM perturbation of the check loss.
    pub eps_mm: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub selection_threshold: f64,
    /// Record per-step objective pairs in [`Diagnostics::descent`].
    #[serde(default)]
    pub trace: bool,
}

impl SolverOptions {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            max_iter: 5000,
            tol: 1e-4,
            rho: 1.2,
            eps_mm: 1e-4,
            eps_abs: 1e-2,
            eps_rel: 1e-4,
            selection_threshold: 1e-3,
            trace: false,
        }
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol", self.tol),
            ("rho", self.rho),
            ("eps_mm", self.eps_mm),
            ("eps_abs", self.eps_abs),
            ("eps_rel", self.eps_rel),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if !(self.selection_threshold >= 0.0) {
            return Err(Error::Config("selection_threshold must be nonnegative".into()));
        }
        Ok(())
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::new(Algorithm::Admm)
    }
}

/// Solver-specific side information attached to a [`FitResult`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// A ridge term was added because a normal matrix was not positive definite.
    pub ridge_fallback: bool,
    /// Covariates skipped because their column is identically zero.
    pub skipped_coordinates: Vec<usize>,
    /// Pilot coefficients used to build adaptive weights (pipeline only).
    pub pilot: Option<Vec<f64>>,
    /// `(before, after)` monitored objective per MM iteration or CD update,
    /// recorded when [`SolverOptions::trace`] is set.
    pub descent: Vec<(f64, f64)>,
    /// Final ADMM iterate, kept so stopping decisions can be audited.
    pub admm: Option<AdmmState>,
    pub lp_status: Option<LpStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub intercepts: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Unsmoothed objective of the fitted problem, penalty included.
    pub objective: f64,
    pub algorithm: Algorithm,
    pub diagnostics: Diagnostics,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_rejects_mismatch_and_nan() {
        let x = DMatrix::from_element(3, 2, 1.0);
        assert!(Dataset::new(x.clone(), DVector::from_element(2, 0.0)).is_err());
        let mut bad = x.clone();
        bad[(1, 1)] = f64::NAN;
        let err = Dataset::new(bad, DVector::from_element(3, 0.0)).unwrap_err();
        assert!(err.to_string().contains("row 1, column 1"));
        assert!(Dataset::new(DMatrix::zeros(0, 0), DVector::zeros(0)).is_err());
        assert!(Dataset::new(DMatrix::zeros(2, 0), DVector::zeros(2)).is_ok());
    }

    #[test]
    fn levels_validation() {
        assert!(QuantileLevels::new(vec![]).is_err());
        assert!(QuantileLevels::new(vec![0.0]).is_err());
        assert!(QuantileLevels::new(vec![0.5, 1.0]).is_err());
        assert!(QuantileLevels::new(vec![0.3, 0.3]).is_err());
        assert!(QuantileLevels::new(vec![0.5, 0.2]).is_err());
        let l = QuantileLevels::equally_spaced(9).unwrap();
        assert_eq!(l.len(), 9);
        assert!((l.as_slice()[0] - 0.1).abs() < 1e-15);
        assert!((l.as_slice()[8] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn options_defaults() {
        let o = SolverOptions::default();
        assert_eq!(o.max_iter, 5000);
        assert_eq!(o.rho, 1.2);
        assert_eq!(o.eps_abs, 1e-2);
        assert_eq!(o.eps_rel, 1e-4);
        assert!(o.validate().is_ok());
        let mut bad = o.clone();
        bad.rho = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn algorithm_parse() {
        assert_eq!("ADMM".parse::<Algorithm>().unwrap(), Algorithm::Admm);
        assert!("simplex".parse::<Algorithm>().is_err());
    }
}
