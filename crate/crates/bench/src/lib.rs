//! Shared fixtures for the criterion benchmarks.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sgam::{expand, BasisSpec, ExpandedDesign};

/// Random magnitudes in `[-3, 3]`.
pub fn random_matrix(d: usize, m: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((d, m), |_| rng.random_range(-3.0..3.0))
}

/// A raw design on the unit cube.
pub fn random_design(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, d), |_| rng.random::<f64>())
}

/// A labelled logistic problem with a one-feature signal.
pub fn random_problem(n: usize, d: usize, m: usize, seed: u64) -> (ExpandedDesign, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_design(n, d, seed ^ 0x9E37);
    let design = expand(&x, &BasisSpec::cosine(m).expect("m >= 1")).expect("unit interval");
    let y = (0..n)
        .map(|i| {
            let g = 4.0 * (x[[i, 0]] - 0.5);
            u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-g).exp()))
        })
        .collect();
    (design, y)
}

/// Nonincreasing positive weights.
pub fn sorted_weights(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..1.0)).collect();
    w.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    w
}
