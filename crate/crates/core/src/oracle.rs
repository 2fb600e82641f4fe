//! Ground-truth machinery for desk-scale verification: exhaustive optimal
//! subset search, the squared-singular-value spectrum of a column set, an
//! adversarial instance that slows greedy down, a small-scale PCA upper
//! bound, and seeded random instance generation.
//!
//! Convention used throughout: `sigma_min` and `sigma_max` are the smallest
//! and largest SQUARED singular values of the unit-normalized column set,
//! i.e. the extreme eigenvalues of its Gram matrix. Every bound formula in
//! this crate expects that convention.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm_sq, normalized_columns, ColumnMatrix, ColumnSet};
use crate::objective::{coverage_naive_set, orthonormalize};
use crate::rng::substream;
use rand::Rng;
use rand_distr::StandardNormal;

const BRUTE_FORCE_GUARD: u64 = 1_000_000;
const PCA_DIM_GUARD: usize = 500;
const PCA_MAX_ITERATIONS: usize = 10_000;

/// Extreme squared singular values of a normalized column set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumStats {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `sigma_max / sigma_min`; infinite for a rank-deficient set.
    pub kappa: f64,
}

/// Outcome of the exhaustive search over k-subsets.
#[derive(Clone, Debug)]
pub struct OptResult {
    pub opt_set: ColumnSet,
    pub opt_value: f64,
    pub spectrum: SpectrumStats,
    pub subsets_evaluated: usize,
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u64) {
            Some(v) => v / (i as u64 + 1),
            None => return u64::MAX,
        };
        if acc > 100 * BRUTE_FORCE_GUARD {
            return u64::MAX;
        }
    }
    acc
}

/// Exhaustive optimum: coverage of every k-subset of `b`'s columns, ties
/// broken toward the lexicographically smallest index tuple.
pub fn brute_force_opt(a: &ColumnMatrix, b: &ColumnMatrix, k: usize) -> Result<OptResult> {
    if k < 1 || k > b.cols() {
        return Err(Error::InvalidParam(format!(
            "subset size {} invalid for {} candidate columns",
            k,
            b.cols()
        )));
    }
    let count = binomial(b.cols(), k);
    if count > BRUTE_FORCE_GUARD {
        return Err(Error::Guard {
            what: "brute-force subset enumeration",
            limit: BRUTE_FORCE_GUARD,
            requested: count,
        });
    }
    let mut indices: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut evaluated = 0usize;
    loop {
        let set = ColumnSet::from_indices(indices.clone())?;
        let value = coverage_naive_set(a, b, &set)?;
        evaluated += 1;
        // lexicographic enumeration order makes strict improvement keep the
        // lexicographically smallest maximizer
        match &best {
            None => best = Some((indices.clone(), value)),
            Some((_, v)) if value > *v => best = Some((indices.clone(), value)),
            _ => {}
        }
        // advance to the next combination
        let n = b.cols();
        let mut i = k;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if indices[i] != i + n - k {
                indices[i] += 1;
                for j in i + 1..k {
                    indices[j] = indices[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                let (opt_indices, opt_value) = best.unwrap();
                let opt_set = ColumnSet::from_indices(opt_indices)?;
                let spectrum = spectrum(b, &opt_set)?;
                return Ok(OptResult {
                    opt_set,
                    opt_value,
                    spectrum,
                    subsets_evaluated: evaluated,
                });
            }
        }
    }
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut m: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale: f64 = m
        .iter()
        .map(|row| norm_sq(row))
        .sum::<f64>()
        .sqrt()
        .max(1.0);
    let tol = 1e-12 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p][q] * m[p][q];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            return Ok((0..n).map(|i| m[i][i]).collect());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = {
                    let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for i in 0..n {
                    let mpi = m[p][i];
                    let mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
            }
        }
    }
    Err(Error::NoConvergence {
        what: "jacobi eigenvalue sweep",
        iterations: 100,
    })
}

/// Spectrum of the Gram matrix of the unit-normalized columns indexed by
/// `s`. Eigenvalues below the solver's precision are reported as zero.
pub fn spectrum(b: &ColumnMatrix, s: &ColumnSet) -> Result<SpectrumStats> {
    if s.is_empty() {
        return Err(Error::InvalidParam("spectrum of an empty set".into()));
    }
    let cols = normalized_columns(b, s)?;
    let t = cols.len();
    let mut gram = vec![vec![0.0; t]; t];
    for i in 0..t {
        for j in i..t {
            let g = dot(&cols[i], &cols[j]);
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let eigs = jacobi_eigenvalues(gram)?;
    let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let clamp = 1e-12 * max.max(1.0);
    let cleaned: Vec<f64> = eigs
        .iter()
        .map(|&l| if l.abs() < clamp { 0.0 } else { l.max(0.0) })
        .collect();
    let sigma_min = cleaned.iter().cloned().fold(f64::INFINITY, f64::min);
    let sigma_max = cleaned.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kappa = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    Ok(SpectrumStats {
        sigma_min,
        sigma_max,
        kappa,
    })
}

/// Adversarial instance in dimension `n + 1`: the target is the first
/// coordinate axis; the pool holds two columns that cover it exactly plus
/// `n - 1` decoys `2*theta*e_0 + e_j` that greedy prefers, forcing slow
/// progress. Decoys are used as stated, without renormalization.
pub fn make_tight_example(n: usize, theta: f64) -> Result<(ColumnMatrix, ColumnMatrix)> {
    if n < 2 {
        return Err(Error::InvalidParam("tight example needs n >= 2".into()));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParam(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    let dim = n + 1;
    let mut a_col = vec![0.0; dim];
    a_col[0] = 1.0;
    let a = ColumnMatrix::from_columns(&[a_col])?;

    let mut b_cols = Vec::with_capacity(n + 1);
    let mut e1 = vec![0.0; dim];
    e1[1] = 1.0;
    b_cols.push(e1);
    let mut covering = vec![0.0; dim];
    covering[0] = theta;
    covering[1] = 1.0;
    b_cols.push(covering);
    for j in 2..=n {
        let mut decoy = vec![0.0; dim];
        decoy[0] = 2.0 * theta;
        decoy[j] = 1.0;
        b_cols.push(decoy);
    }
    Ok((a, ColumnMatrix::from_columns(&b_cols)?))
}

/// Sum of the top-k squared singular values via shifted orthogonal
/// iteration on the smaller-side Gram matrix.
pub fn pca_upper_bound(a: &ColumnMatrix, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let dim = a.rows().min(a.cols());
    if dim > PCA_DIM_GUARD {
        return Err(Error::Guard {
            what: "pca gram dimension",
            limit: PCA_DIM_GUARD as u64,
            requested: dim as u64,
        });
    }
    let fro = a.frobenius_sq();
    if fro == 0.0 {
        return Ok(0.0);
    }
    // Gram of the smaller side: A^T A if cols <= rows, else A A^T.
    let gram: Vec<Vec<f64>> = if a.cols() <= a.rows() {
        let cols = a.to_columns();
        (0..a.cols())
            .map(|i| (0..a.cols()).map(|j| dot(&cols[i], &cols[j])).collect())
            .collect()
    } else {
        let cols = a.to_columns();
        let m = a.rows();
        let mut g = vec![vec![0.0; m]; m];
        for col in &cols {
            for i in 0..m {
                for j in i..m {
                    g[i][j] += col[i] * col[j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                g[i][j] = g[j][i];
            }
        }
        g
    };
    let n = gram.len();
    let k_eff = k.min(n);
    // a small diagonal shift keeps the iterate block full rank even when
    // the matrix itself is rank deficient; Rayleigh quotients below are
    // taken on the unshifted matrix
    let trace: f64 = (0..n).map(|i| gram[i][i]).sum();
    let shift = 1e-3 * (trace / n as f64);

    let mat_vec = |v: &[f64], with_shift: bool| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[i] = dot(&gram[i], v);
        }
        if with_shift {
            axpy(&mut out, shift, v);
        }
        out
    };

    let mut rng = substream(0x5eed_0c0a, "pca-orthogonal-iteration");
    let mut block: Vec<Vec<f64>> = (0..k_eff)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    block = orthonormalize(&block, 1e-300);
    let mut prev_sum = f64::NEG_INFINITY;
    for _iter in 0..PCA_MAX_ITERATIONS {
        let mapped: Vec<Vec<f64>> = block.iter().map(|v| mat_vec(v, true)).collect();
        block = orthonormalize(&mapped, 1e-300);
        let sum: f64 = block.iter().map(|q| dot(q, &mat_vec(q, false))).sum();
        if (sum - prev_sum).abs() <= 1e-10 * sum.abs().max(1e-30) {
            return Ok(sum.max(0.0));
        }
        prev_sum = sum;
    }
    Err(Error::NoConvergence {
        what: "pca orthogonal iteration",
        iterations: PCA_MAX_ITERATIONS,
    })
}

/// Seeded random instance `A = L R^T + noise * N` with effective rank
/// `rank_hint`. When `n_b == n_a` the candidate pool is the target itself;
/// otherwise an independent pool is drawn over the same low-rank factor so
/// candidates can still cover the target.
pub fn make_random_instance(
    m: usize,
    n_a: usize,
    n_b: usize,
    rank_hint: usize,
    noise: f64,
    seed: u64,
) -> Result<(ColumnMatrix, ColumnMatrix)> {
    if m < 1 || n_a < 1 || n_b < 1 {
        return Err(Error::InvalidParam("dimensions must be >= 1".into()));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::InvalidParam("noise must be finite and >= 0".into()));
    }
    let rank = rank_hint.clamp(1, m.min(n_a));
    let mut rng = substream(seed, "random-instance");
    let factors: Vec<Vec<f64>> = (0..rank)
        .map(|_| (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let draw_pool = |count: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| {
                let mut col = vec![0.0; m];
                for factor in &factors {
                    let w: f64 = rng.sample(StandardNormal);
                    axpy(&mut col, w, factor);
                }
                if noise > 0.0 {
                    for x in col.iter_mut() {
                        let e: f64 = rng.sample(StandardNormal);
                        *x += noise * e;
                    }
                }
                col
            })
            .collect()
    };
    let a_cols = draw_pool(n_a, &mut rng);
    let a = ColumnMatrix::from_columns(&a_cols)?;
    let b = if n_b == n_a {
        a.clone()
    } else {
        ColumnMatrix::from_columns(&draw_pool(n_b, &mut rng))?
    };
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::coverage_naive;

    fn sample_3x3() -> ColumnMatrix {
        ColumnMatrix::from_columns(&[
            vec![1.0, 1.0, 0.0],
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn spectrum_of_orthonormal_set() {
        let b = ColumnMatrix::from_columns(&[vec![2.0, 0.0, 0.0], vec![0.0, 0.0, -3.0]]).unwrap();
        let s = ColumnSet::from_indices(vec![0, 1]).unwrap();
        let st = spectrum(&b, &s).unwrap();
        assert!((st.sigma_min - 1.0).abs() < 1e-12);
        assert!((st.sigma_max - 1.0).abs() < 1e-12);
        assert!((st.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_of_duplicated_column() {
        let b = ColumnMatrix::from_columns(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = ColumnSet::from_indices(vec![0, 1]).unwrap();
        let st = spectrum(&b, &s).unwrap();
        assert_eq!(st.sigma_min, 0.0);
        assert!(st.kappa.is_infinite());
    }

    #[test]
    fn spectrum_of_sixty_degree_pair() {
        // unit vectors at 60 degrees: Gram [[1, 0.5], [0.5, 1]]
        let half = 0.5f64;
        let b = ColumnMatrix::from_columns(&[
            vec![1.0, 0.0],
            vec![half, (1.0 - half * half).sqrt()],
        ])
        .unwrap();
        let s = ColumnSet::from_indices(vec![0, 1]).unwrap();
        let st = spectrum(&b, &s).unwrap();
        assert!((st.sigma_min - 0.5).abs() < 1e-10);
        assert!((st.sigma_max - 1.5).abs() < 1e-10);
    }

    #[test]
    fn spectrum_trace_identity() {
        let (_, b) = make_random_instance(6, 5, 5, 3, 0.2, 11).unwrap();
        let s = ColumnSet::from_indices(vec![0, 2, 4]).unwrap();
        let st = spectrum(&b, &s).unwrap();
        // eigenvalue sum of the normalized Gram equals the set size
        assert!(st.sigma_min >= 0.0 && st.sigma_max >= st.sigma_min);
        let cols = normalized_columns(&b, &s).unwrap();
        let trace: f64 = cols.iter().map(|c| dot(c, c)).sum();
        assert!((trace - 3.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_on_sample_matrix() {
        let a = sample_3x3();
        let opt2 = brute_force_opt(&a, &a, 2).unwrap();
        assert!((opt2.opt_value - 6.0).abs() < 1e-10);
        assert_eq!(opt2.opt_set.indices(), &[0, 1]);
        assert_eq!(opt2.subsets_evaluated, 3);

        let opt1 = brute_force_opt(&a, &a, 1).unwrap();
        assert!((opt1.opt_value - 3.0).abs() < 1e-10);

        let opt3 = brute_force_opt(&a, &a, 3).unwrap();
        let full = coverage_naive(&a, &a.to_columns()).unwrap();
        assert!((opt3.opt_value - full).abs() < 1e-10);
    }

    #[test]
    fn brute_force_guard_trips() {
        let (a, b) = make_random_instance(3, 3, 60, 2, 0.1, 1).unwrap();
        assert!(matches!(
            brute_force_opt(&a, &b, 30),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn tight_example_shape_and_coverage() {
        let (a, b) = make_tight_example(6, 0.5).unwrap();
        assert_eq!(a.rows(), 7);
        assert_eq!(b.cols(), 7);
        assert_eq!(b.rows(), 7);
        // the two covering columns represent the target exactly
        let pair = ColumnSet::from_indices(vec![0, 1]).unwrap();
        let cov = coverage_naive_set(&a, &b, &pair).unwrap();
        assert!((cov - 1.0).abs() < 1e-12);
        // one greedy pick covers 4 theta^2 / (1 + 4 theta^2) = 0.5
        let one = ColumnSet::from_indices(vec![2]).unwrap();
        let cov1 = coverage_naive_set(&a, &b, &one).unwrap();
        assert!((cov1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pca_bound_examples() {
        let mut eye = vec![0.0; 9];
        for i in 0..3 {
            eye[i * 3 + i] = 1.0;
        }
        let id3 = ColumnMatrix::from_dense(3, 3, eye).unwrap();
        let top2 = pca_upper_bound(&id3, 2).unwrap();
        assert!((top2 - 2.0).abs() < 1e-9, "top2 = {top2}");

        let (rank1, _) = make_random_instance(5, 4, 4, 1, 0.0, 3).unwrap();
        let v = pca_upper_bound(&rank1, 1).unwrap();
        assert!((v - rank1.frobenius_sq()).abs() < 1e-8 * rank1.frobenius_sq());

        let a = sample_3x3();
        let v2 = pca_upper_bound(&a, 2).unwrap();
        assert!((v2 - 6.0).abs() < 1e-9, "v2 = {v2}");
    }

    #[test]
    fn pca_guard_on_dimension() {
        let (a, _) = make_random_instance(501, 501, 501, 1, 0.0, 1)
            .map(|(a, b)| (a, b))
            .unwrap();
        assert!(matches!(pca_upper_bound(&a, 1), Err(Error::Guard { .. })));
    }

    #[test]
    fn random_instances_are_seeded() {
        let (a1, b1) = make_random_instance(4, 5, 7, 2, 0.3, 42).unwrap();
        let (a2, b2) = make_random_instance(4, 5, 7, 2, 0.3, 42).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        let (a3, _) = make_random_instance(4, 5, 7, 2, 0.3, 43).unwrap();
        assert_ne!(a1, a3);
    }

    #[test]
    fn rank_hint_controls_the_span() {
        let (a, b) = make_random_instance(8, 6, 6, 3, 0.0, 9).unwrap();
        let opt = brute_force_opt(&a, &b, 3).unwrap();
        assert!(
            (opt.opt_value - a.frobenius_sq()).abs() <= 1e-8 * a.frobenius_sq(),
            "rank-3 matrix should be covered by 3 columns"
        );
    }
}
