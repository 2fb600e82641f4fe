//! The coverage objective and its incrementally maintained selection state.
//!
//! Coverage of a target matrix by a set of vectors is the squared Frobenius
//! norm of the target's projection onto their span. `coverage_naive`
//! evaluates it from scratch by explicit orthonormalization and is the
//! reference the incremental path is tested against. `SelectionState` keeps
//! residuals of both the target and the candidate pool orthogonal to the
//! current selection, which makes each marginal-gain evaluation a single
//! pass over the target's residual columns.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm_sq, ColumnMatrix, ColumnSet};

/// Residual mass below `DEAD_REL_TOL` times the column's original squared
/// norm marks the candidate as dead: it lies in the span of the selection
/// and can contribute no further gain.
const DEAD_REL_TOL: f64 = 1e-12;

/// Orthonormalization drop tolerance for the naive evaluator, relative to
/// each vector's original norm.
const NAIVE_DROP_TOL: f64 = 1e-10;

/// Marginal gain of one candidate column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainReport {
    pub candidate: usize,
    pub gain: f64,
}

/// Two-pass modified Gram-Schmidt. Vectors whose residual falls below
/// `rel_tol` times their original norm are dropped, so the result spans the
/// input even when it is rank deficient.
pub(crate) fn orthonormalize(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let orig = norm_sq(v).sqrt();
        if orig == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(&mut w, -c, q);
            }
        }
        let n = norm_sq(&w).sqrt();
        if n > rel_tol * orig {
            let inv = 1.0 / n;
            for x in &mut w {
                *x *= inv;
            }
            basis.push(w);
        }
    }
    basis
}

/// Coverage of `a` by the span of `vectors`, evaluated from scratch.
pub fn coverage_naive(a: &ColumnMatrix, vectors: &[Vec<f64>]) -> Result<f64> {
    for v in vectors {
        if v.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                what: "projection vector length",
                expected: a.rows(),
                found: v.len(),
            });
        }
    }
    let basis = orthonormalize(vectors, NAIVE_DROP_TOL);
    let mut total = 0.0;
    for j in 0..a.cols() {
        let col = a.col_dense(j);
        for q in &basis {
            let c = dot(&col, q);
            total += c * c;
        }
    }
    Ok(total)
}

/// Coverage of `a` by the span of the indexed columns of `b`.
pub fn coverage_naive_set(a: &ColumnMatrix, b: &ColumnMatrix, set: &ColumnSet) -> Result<f64> {
    let cols = b.columns(set.indices())?;
    coverage_naive(a, &cols)
}

/// Incremental selection state over a target `A` and candidate pool `B`.
#[derive(Clone, Debug)]
pub struct SelectionState {
    rows: usize,
    selected: ColumnSet,
    basis: Vec<Vec<f64>>,
    residual_a: Vec<Vec<f64>>,
    residual_b: Vec<Vec<f64>>,
    coverage: f64,
    fro_sq_a: f64,
    orig_b_norm_sq: Vec<f64>,
    dead: Vec<bool>,
}

/// Fresh state: nothing selected, residuals equal to the inputs.
pub fn init_state(a: &ColumnMatrix, b: &ColumnMatrix) -> Result<SelectionState> {
    SelectionState::new(a, b)
}

impl SelectionState {
    pub fn new(a: &ColumnMatrix, b: &ColumnMatrix) -> Result<Self> {
        if a.rows() != b.rows() {
            return Err(Error::DimensionMismatch {
                what: "candidate row count",
                expected: a.rows(),
                found: b.rows(),
            });
        }
        let residual_b = b.to_columns();
        let orig_b_norm_sq: Vec<f64> = residual_b.iter().map(|c| norm_sq(c)).collect();
        let dead = orig_b_norm_sq.iter().map(|&n| n == 0.0).collect();
        Ok(SelectionState {
            rows: a.rows(),
            selected: ColumnSet::new(),
            basis: Vec::new(),
            residual_a: a.to_columns(),
            residual_b,
            coverage: 0.0,
            fro_sq_a: a.frobenius_sq(),
            orig_b_norm_sq,
            dead,
        })
    }

    pub fn selected(&self) -> &ColumnSet {
        &self.selected
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn frobenius_sq_a(&self) -> f64 {
        self.fro_sq_a
    }

    pub fn num_candidates(&self) -> usize {
        self.residual_b.len()
    }

    pub fn is_dead(&self, j: usize) -> bool {
        self.dead[j]
    }

    pub fn is_selected(&self, j: usize) -> bool {
        self.selected.contains(j)
    }

    /// Candidates that are neither selected nor dead, in index order.
    pub fn alive_candidates(&self) -> Vec<usize> {
        (0..self.residual_b.len())
            .filter(|&j| !self.dead[j] && !self.selected.contains(j))
            .collect()
    }

    pub fn basis_vectors(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn residual_a_frobenius_sq(&self) -> f64 {
        self.residual_a.iter().map(|c| norm_sq(c)).sum()
    }

    pub fn residual_b_norm_sq(&self, j: usize) -> f64 {
        norm_sq(&self.residual_b[j])
    }

    fn dead_threshold(&self, j: usize) -> f64 {
        DEAD_REL_TOL * self.orig_b_norm_sq[j]
    }

    fn check_candidate(&self, j: usize) -> Result<()> {
        if j >= self.residual_b.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                cols: self.residual_b.len(),
            });
        }
        if self.selected.contains(j) {
            return Err(Error::AlreadySelected(j));
        }
        Ok(())
    }

    /// Coverage gain from adding candidate `j` to the selection. A candidate
    /// whose residual has fallen below the dead threshold reports zero gain
    /// and is marked dead.
    pub fn marginal_gain(&mut self, j: usize) -> Result<GainReport> {
        self.check_candidate(j)?;
        let r2 = norm_sq(&self.residual_b[j]);
        if r2 <= self.dead_threshold(j) || r2 == 0.0 {
            self.dead[j] = true;
            return Ok(GainReport {
                candidate: j,
                gain: 0.0,
            });
        }
        let mut sum = 0.0;
        for col in &self.residual_a {
            let c = dot(col, &self.residual_b[j]);
            sum += c * c;
        }
        Ok(GainReport {
            candidate: j,
            gain: sum / r2,
        })
    }

    /// Commits candidate `j`: extends the basis with its normalized residual
    /// and strips that direction from every residual column. Returns the
    /// realized coverage gain.
    pub fn commit(&mut self, j: usize) -> Result<f64> {
        self.check_candidate(j)?;
        let threshold = self.dead_threshold(j);
        if self.dead[j] || norm_sq(&self.residual_b[j]) <= threshold {
            self.dead[j] = true;
            return Err(Error::DeadCandidate(j));
        }
        // One extra orthogonalization pass keeps the basis orthonormal over
        // long runs of commits.
        let mut v = self.residual_b[j].clone();
        for q in &self.basis {
            let c = dot(&v, q);
            axpy(&mut v, -c, q);
        }
        let n2 = norm_sq(&v);
        if n2 <= threshold {
            self.dead[j] = true;
            return Err(Error::DeadCandidate(j));
        }
        let inv = 1.0 / n2.sqrt();
        for x in &mut v {
            *x *= inv;
        }

        let mut gain = 0.0;
        for col in &mut self.residual_a {
            let c = dot(col, &v);
            gain += c * c;
            axpy(col, -c, &v);
        }
        for col in &mut self.residual_b {
            let c = dot(col, &v);
            axpy(col, -c, &v);
        }
        self.basis.push(v);
        self.selected.push(j)?;
        self.coverage += gain;
        Ok(gain)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}
