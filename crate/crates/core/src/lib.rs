//! Quantile regression (QR) and composite quantile regression (CQR), with and
//! without an adaptive-lasso penalty.
//!
//! Four interchangeable solvers share one set of domain types:
//!
//! - [`solvers::admm`]: alternating direction method of multipliers on the
//!   stacked design `X* beta + r = Y*`.
//! - [`solvers::mm`]: majorize-minimization on a log-perturbed check loss.
//! - [`solvers::cd`]: coordinate descent with weighted-median coordinate moves.
//! - [`solvers::ip`]: linear-programming reformulation solved by a primal-dual
//!   predictor-corrector interior point method. Also serves as the reference
//!   optimum in tests.
//!
//! Most callers want [`pipeline::fit`], which validates a [`pipeline::FitRequest`],
//! runs the unpenalized pilot fit when adaptive weights are needed, and
//! dispatches to the requested solver.
//!
//! ```
//! use cqreg::{Dataset, QuantileLevels, SolverOptions, Algorithm};
//! use cqreg::pipeline::{fit, FitRequest};
//! use nalgebra::{DMatrix, DVector};
//!
//! let x = DMatrix::from_column_slice(5, 1, &[1.0, 2.0, 3.0, 4.0, 5.0]);
//! let y = DVector::from_vec(vec![2.1, 3.9, 6.2, 8.0, 9.9]);
//! let data = Dataset::new(x, y).unwrap();
//! let levels = QuantileLevels::single(0.5).unwrap();
//! let req = FitRequest::unregularized(data, levels, SolverOptions::new(Algorithm::Ip));
//! let res = fit(&req).unwrap();
//! assert_eq!(res.intercepts.len(), 1);
//! assert_eq!(res.coefficients.len(), 1);
//! ```

pub mod design;
pub mod error;
pub mod linalg;
pub mod loss;
pub mod order;
pub mod penalty;
pub mod pipeline;
pub mod solvers;
pub mod types;

pub use design::{stack_composite, CompositeDesign};
pub use error::{Error, Result};
pub use loss::{check_loss, objective, soft_threshold};
pub use order::{sample_quantile, weighted_median};
pub use penalty::{adaptive_weights, AdaptiveWeights, PenaltySpec, PILOT_FLOOR};
pub use types::{Algorithm, Dataset, Diagnostics, FitResult, QuantileLevels, SolverOptions};
