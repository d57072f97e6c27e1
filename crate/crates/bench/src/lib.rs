//! Deterministic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chaospi_core::Objectives;

/// Fully chaotic logistic map `x' = 4x(1 - x)`.
pub fn logistic(n: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(n);
    let mut v = 0.31;
    for _ in 0..n {
        x.push(v);
        v = 4.0 * v * (1.0 - v);
    }
    x
}

/// Stationary AR(2) with uniform shocks, shifted to stay positive.
pub fn ar2(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![5.0, 5.0];
    while y.len() < n {
        let t = y.len();
        y.push(0.3 + 0.49 * y[t - 1] + 0.45 * y[t - 2] + rng.random_range(-0.5..0.5));
    }
    y.truncate(n);
    y
}

/// Uniform random objective vectors in the unit square.
pub fn random_points(n: usize, seed: u64) -> Vec<Objectives> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random(), rng.random()]).collect()
}

/// `runs` mutually non-dominated fronts of `size` points on jittered convex curves.
pub fn random_fronts(runs: usize, size: usize, seed: u64) -> Vec<Vec<Objectives>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..runs)
        .map(|_| {
            let shift: f64 = rng.random_range(0.0..0.2);
            (0..size)
                .map(|i| {
                    let t = i as f64 / (size - 1) as f64;
                    [t + shift, 1.0 - t.sqrt() + shift]
                })
                .collect()
        })
        .collect()
}
