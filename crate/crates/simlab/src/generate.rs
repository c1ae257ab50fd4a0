use cqreg::Dataset;
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

// Truth and data draw from separate streams of the same seed so that changing
// n never changes the truth.
const TRUTH_STREAM: u64 = 1;
const DATA_STREAM: u64 = 2;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// True coefficients. With `support_size == p` every entry is drawn from
/// U[-1, 1]; otherwise `support_size` positions are chosen uniformly and given
/// magnitudes in [0.5, 1] with random sign, the rest are exactly zero.
///
/// # Panics
/// If `support_size > p`.
pub fn generate_truth(p: usize, support_size: usize, seed: u64) -> DVector<f64> {
    assert!(support_size <= p, "support size {support_size} exceeds p = {p}");
    let mut rng = rng(seed, TRUTH_STREAM);
    if support_size == p {
        return DVector::from_fn(p, |_, _| rng.random_range(-1.0..=1.0));
    }
    let mut beta = DVector::zeros(p);
    let mut positions = sample(&mut rng, p, support_size).into_vec();
    positions.sort_unstable();
    for j in positions {
        let magnitude = rng.random_range(0.5..=1.0);
        beta[j] = if rng.random_bool(0.5) { magnitude } else { -magnitude };
    }
    beta
}

/// `y = intercept + X beta + eps` with `X` and `eps` i.i.d. standard normal.
pub fn generate_data(n: usize, p: usize, true_beta: &DVector<f64>, intercept: f64, seed: u64) -> Dataset {
    assert_eq!(true_beta.len(), p, "truth length must equal p");
    let mut rng = rng(seed, DATA_STREAM);
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let xb = &x * true_beta;
    let y = DVector::from_fn(n, |i, _| intercept + xb[i] + rng.sample::<f64, _>(StandardNormal));
    Dataset::new(x, y).expect("generated data is finite and non-empty")
}
