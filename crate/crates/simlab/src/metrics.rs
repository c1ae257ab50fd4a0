use crate::SimError;

/// Mean absolute coefficient difference `(1/p) sum |estimate_j - truth_j|`.
pub fn coefficient_error(estimate: &[f64], truth: &[f64]) -> Result<f64, SimError> {
    if estimate.len() != truth.len() {
        return Err(SimError::Length { estimate: estimate.len(), truth: truth.len() });
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = estimate.iter().zip(truth).map(|(e, t)| (e - t).abs()).sum();
    Ok(total / truth.len() as f64)
}

/// `(N_T, N_F)`: selected coefficients (`|estimate_j| > threshold`) split by
/// whether the true coefficient is nonzero. Extra entries in the longer slice
/// are ignored.
pub fn selection_counts(estimate: &[f64], truth: &[f64], threshold: f64) -> (usize, usize) {
    estimate
        .iter()
        .zip(truth)
        .filter(|(e, _)| e.abs() > threshold)
        .fold((0, 0), |(t, f), (_, &b)| if b != 0.0 { (t + 1, f) } else { (t, f + 1) })
}
