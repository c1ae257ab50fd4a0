#![allow(dead_code)]

use cqreg::{check_loss, Dataset, QuantileLevels};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `y = 1 + x'beta + e` with Gaussian `x`, `e` and `beta`.
pub fn gaussian_instance(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let beta = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let noise = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y = (&x * &beta).add_scalar(1.0) + noise;
    Dataset::new(x, y).unwrap()
}

pub fn single(tau: f64) -> QuantileLevels {
    QuantileLevels::single(tau).unwrap()
}

/// Minimum QR objective over all fits interpolating p + 1 observations. Some
/// optimal solution of the LP is always such a basic solution.
pub fn interpolation_oracle(data: &Dataset, tau: f64) -> f64 {
    let (n, p) = (data.n(), data.p());
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..=p).collect();
    loop {
        let a = DMatrix::from_fn(p + 1, p + 1, |r, c| if c == 0 { 1.0 } else { data.x()[(idx[r], c - 1)] });
        let b = DVector::from_fn(p + 1, |r, _| data.y()[idx[r]]);
        if let Some(theta) = a.lu().solve(&b) {
            let loss: f64 = (0..n)
                .map(|i| {
                    let fit = theta[0] + (0..p).map(|j| data.x()[(i, j)] * theta[j + 1]).sum::<f64>();
                    check_loss(data.y()[i] - fit, tau).unwrap()
                })
                .sum();
            if loss.is_finite() {
                best = best.min(loss);
            }
        }
        // next (p+1)-combination of 0..n in lexicographic order
        let mut i = p + 1;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < n - (p + 1) + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..=p {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
