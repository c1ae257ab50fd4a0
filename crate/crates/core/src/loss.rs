//! Check loss, the (composite) quantile objective and the soft-threshold operator.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::penalty::PenaltySpec;
use crate::types::{Dataset, QuantileLevels};

/// Check (pinball) loss `t * (tau - 1{t < 0})`.
pub fn check_loss(t: f64, tau: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("check loss argument {t} is not finite")));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("quantile level {tau} is outside (0, 1)")));
    }
    Ok(rho(t, tau))
}

#[inline]
pub(crate) fn rho(t: f64, tau: f64) -> f64 {
    if t >= 0.0 {
        tau * t
    } else {
        (tau - 1.0) * t
    }
}

/// Sum of check losses over all observations and levels, without penalty.
pub(crate) fn fidelity(xb: &DVector<f64>, y: &DVector<f64>, intercepts: &[f64], levels: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&b, &tau) in intercepts.iter().zip(levels) {
        for i in 0..y.len() {
            total += rho(y[i] - b - xb[i], tau);
        }
    }
    total
}

/// `sum_k sum_i rho_{tau_k}(y_i - b_k - x_i' beta) + penalty(beta)`.
///
/// Intercepts are never penalized. With `K = 1` this is the plain QR objective.
pub fn objective(
    data: &Dataset,
    intercepts: &[f64],
    beta: &[f64],
    levels: &QuantileLevels,
    penalty: &PenaltySpec,
) -> Result<f64> {
    if intercepts.len() != levels.len() {
        return Err(Error::Dimension(format!(
            "{} intercepts for {} quantile levels",
            intercepts.len(),
            levels.len()
        )));
    }
    if beta.len() != data.p() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} covariates",
            beta.len(),
            data.p()
        )));
    }
    let weights = penalty.resolve(data.p())?;
    let xb = data.x() * DVector::from_column_slice(beta);
    let fit = fidelity(&xb, data.y(), intercepts, levels.as_slice());
    let pen = weights.map_or(0.0, |w| w.value(beta));
    Ok(fit + pen)
}

/// Componentwise soft threshold `(v_i - a)_+ - (-v_i - a)_+`.
pub fn soft_threshold(v: &[f64], a: f64) -> Result<Vec<f64>> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!("threshold {a} must be nonnegative")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("soft threshold input {x} is not finite")));
    }
    Ok(v.iter().map(|&x| shrink(x, a)).collect())
}

#[inline]
pub(crate) fn shrink(x: f64, a: f64) -> f64 {
    (x - a).max(0.0) - (-x - a).max(0.0)
}
