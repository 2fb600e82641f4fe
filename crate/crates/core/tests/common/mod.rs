//! Shared helpers for the integration suites.

use colsel::matrix::{ColumnMatrix, ColumnSet};
use colsel::objective::coverage_naive_set;
use colsel::rng::substream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// 3x3 instance whose third column is the sum of the first two; total mass
/// 6, each singleton covers exactly 3.
pub fn sample_3x3() -> ColumnMatrix {
    ColumnMatrix::from_columns(&[
        vec![1.0, 1.0, 0.0],
        vec![0.0, -1.0, 1.0],
        vec![1.0, 0.0, 1.0],
    ])
    .unwrap()
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ColumnMatrix {
    let cols_data: Vec<Vec<f64>> = (0..cols)
        .map(|_| (0..rows).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    ColumnMatrix::from_columns(&cols_data).unwrap()
}

pub fn test_rng(seed: u64, tag: &str) -> ChaCha8Rng {
    substream(seed, tag)
}

/// Draws `count` distinct indices below `n`, excluding `exclude`.
pub fn distinct_indices(
    n: usize,
    count: usize,
    exclude: &[usize],
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).filter(|i| !exclude.contains(i)).collect();
    let count = count.min(pool.len());
    for i in 0..count {
        let pick = i + rng.gen_range(0..pool.len() - i);
        pool.swap(i, pick);
    }
    pool[..count].to_vec()
}

pub fn coverage_of(a: &ColumnMatrix, b: &ColumnMatrix, indices: &[usize]) -> f64 {
    let set = ColumnSet::from_indices(indices.to_vec()).unwrap();
    coverage_naive_set(a, b, &set).unwrap()
}

pub fn assert_close(actual: f64, expected: f64, rtol: f64, scale: f64, what: &str) {
    let tol = rtol * expected.abs().max(1e-3 * scale).max(f64::MIN_POSITIVE);
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: actual {actual} vs expected {expected} (tol {tol})"
    );
}

/// Mean and standard error of a sample.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}
