//! Deterministic workloads shared by the benchmarks.

use fle_core::{DMatrix, DVector, FeasibleRegion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Box `[-1, 1]^n` cut by `extra` random rows through a neighbourhood of the
/// origin.
pub fn cut_box(n: usize, extra: usize, seed: u64) -> FeasibleRegion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = n + extra;
    let mut a_i = DMatrix::zeros(rows, n);
    let mut lower = DVector::from_element(rows, -1.0);
    let mut upper = DVector::from_element(rows, 1.0);
    for i in 0..n {
        a_i[(i, i)] = 1.0;
    }
    for r in n..rows {
        for c in 0..n {
            a_i[(r, c)] = rng.random_range(-1.0..1.0);
        }
        lower[r] = f64::NEG_INFINITY;
        upper[r] = rng.random_range(0.2..1.0);
    }
    FeasibleRegion::new(
        DMatrix::zeros(0, n),
        DVector::zeros(0),
        a_i,
        lower,
        upper,
        DVector::zeros(n),
    )
    .expect("the origin is feasible")
}

/// Points far outside `cut_box`, so projections hit several rows.
pub fn outside_points(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DVector::from_fn(n, |_, _| rng.random_range(-4.0..4.0)))
        .collect()
}

/// `count` random unit normals in `R^dim`.
pub fn unit_normals(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)).normalize())
        .collect()
}
