//! Order-statistic primitives: weighted median and lower sample quantile.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Weighted median of `z` with nonnegative weights `w`.
///
/// Sorts `(z, index)` ascending and returns `z_(i*)` for the smallest `i*` whose
/// cumulative weight reaches half the total. The returned value minimizes
/// `sum_i w_i |z_i - m|`.
pub fn weighted_median(z: &[f64], w: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::Domain("weighted median of an empty set".into()));
    }
    if z.len() != w.len() {
        return Err(Error::Dimension(format!("{} values but {} weights", z.len(), w.len())));
    }
    if let Some(bad) = w.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("weight {bad} is not a finite nonnegative number")));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("weighted median values must be finite".into()));
    }
    let mut pairs: Vec<(f64, f64)> = z.iter().copied().zip(w.iter().copied()).collect();
    weighted_median_in_place(&mut pairs)
        .ok_or_else(|| Error::Domain("weights sum to zero".into()))
}

/// Weighted median over `(value, weight)` pairs, reordering the buffer.
/// Returns `None` when the total weight is not positive.
pub(crate) fn weighted_median_in_place(pairs: &mut [(f64, f64)]) -> Option<f64> {
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if !(total > 0.0) {
        return None;
    }
    // Stable sort keeps equal values in input order.
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let half = 0.5 * total;
    let mut cum = 0.0;
    for &(z, w) in pairs.iter() {
        cum += w;
        if cum >= half {
            return Some(z);
        }
    }
    pairs.last().map(|p| p.0)
}

/// 1-based rank `ceil(n * tau)`, guarded against products like `10 * 0.3`
/// landing one ulp above an integer.
pub(crate) fn quantile_rank(n: usize, tau: f64) -> usize {
    let t = n as f64 * tau;
    let k = (t - 1e-10 * t.max(1.0)).ceil() as usize;
    k.clamp(1, n)
}

/// Lower empirical quantile `v_(ceil(n tau))`, a minimizer of
/// `sum_i rho_tau(v_i - b)` over `b`.
pub fn sample_quantile(values: &[f64], tau: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("sample quantile of an empty set".into()));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("quantile level {tau} is outside (0, 1)")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("sample quantile values must be finite".into()));
    }
    let mut buf = values.to_vec();
    Ok(select_quantile(&mut buf, tau))
}

/// Selection-based quantile on a scratch buffer.
pub(crate) fn select_quantile(buf: &mut [f64], tau: f64) -> f64 {
    let k = quantile_rank(buf.len(), tau) - 1;
    let (_, v, _) = buf.select_nth_unstable_by(k, |a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    *v
}
