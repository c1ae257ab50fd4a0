use std::fmt;

use thiserror::Error;

use crate::solvers::ip::LpStatus;

pub type Result<T> = std::result::Result<T, Error>;

/// Which part of a two-stage adaptive fit failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Pilot,
    Final,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Pilot => f.write_str("pilot"),
            Stage::Final => f.write_str("final"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid quantile levels: {0}")]
    InvalidLevels(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{stage} fit did not converge after {iterations} iterations")]
    NotConverged { stage: Stage, iterations: usize },

    #[error("linear program terminated with status {0:?}")]
    Lp(LpStatus),
}
