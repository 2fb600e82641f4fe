//! Column-major matrix storage and ordered column sets.
//!
//! `ColumnMatrix` carries both the target matrix and the candidate pool. It
//! is immutable after construction and admits only finite values, so every
//! downstream computation can assume clean input. Dense storage is
//! column-major; sparse storage is compressed by column with strictly
//! increasing row indices and no explicit zeros.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse {
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl ColumnMatrix {
    /// Builds a dense matrix from column-major values.
    pub fn from_dense(rows: usize, cols: usize, column_major: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if column_major.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "dense storage length",
                expected: rows * cols,
                found: column_major.len(),
            });
        }
        if !column_major.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "dense matrix construction".to_string(),
            });
        }
        Ok(ColumnMatrix {
            rows,
            cols,
            storage: Storage::Dense(column_major),
        })
    }

    /// Builds a dense matrix from a list of equally sized columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let rows = columns[0].len();
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    what: "column length",
                    expected: rows,
                    found: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Self::from_dense(rows, columns.len(), data)
    }

    /// Builds a sparse matrix from `(row, col, value)` triplets. Explicit
    /// zeros are dropped; duplicate coordinates are rejected.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidParam(format!(
                    "entry ({}, {}) outside a {}x{} matrix",
                    i, j, rows, cols
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("sparse entry ({}, {})", i, j),
                });
            }
            if v != 0.0 {
                entries.push((j, i, v));
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::InvalidParam(format!(
                    "duplicate entry at ({}, {})",
                    pair[0].1, pair[0].0
                )));
            }
        }
        let mut col_ptr = vec![0usize; cols + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for &(j, i, v) in &entries {
            col_ptr[j + 1] += 1;
            row_idx.push(i);
            values.push(v);
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(ColumnMatrix {
            rows,
            cols,
            storage: Storage::Sparse {
                col_ptr,
                row_idx,
                values,
            },
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// Entry accessor; panics on out-of-range coordinates.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        match &self.storage {
            Storage::Dense(data) => data[j * self.rows + i],
            Storage::Sparse {
                col_ptr,
                row_idx,
                values,
            } => {
                let lo = col_ptr[j];
                let hi = col_ptr[j + 1];
                match row_idx[lo..hi].binary_search(&i) {
                    Ok(pos) => values[lo + pos],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Column `j` as a dense vector; panics on out-of-range index.
    pub fn col_dense(&self, j: usize) -> Vec<f64> {
        assert!(j < self.cols, "column index out of range");
        match &self.storage {
            Storage::Dense(data) => data[j * self.rows..(j + 1) * self.rows].to_vec(),
            Storage::Sparse {
                col_ptr,
                row_idx,
                values,
            } => {
                let mut col = vec![0.0; self.rows];
                for p in col_ptr[j]..col_ptr[j + 1] {
                    col[row_idx[p]] = values[p];
                }
                col
            }
        }
    }

    pub fn col_norm_sq(&self, j: usize) -> f64 {
        assert!(j < self.cols, "column index out of range");
        match &self.storage {
            Storage::Dense(data) => norm_sq(&data[j * self.rows..(j + 1) * self.rows]),
            Storage::Sparse {
                col_ptr, values, ..
            } => norm_sq(&values[col_ptr[j]..col_ptr[j + 1]]),
        }
    }

    /// Sum of squares of every entry.
    pub fn frobenius_sq(&self) -> f64 {
        match &self.storage {
            Storage::Dense(data) => norm_sq(data),
            Storage::Sparse { values, .. } => norm_sq(values),
        }
    }

    /// All columns as dense vectors.
    pub fn to_columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.col_dense(j)).collect()
    }

    /// Dense columns at the given indices, bounds-checked.
    pub fn columns(&self, indices: &[usize]) -> Result<Vec<Vec<f64>>> {
        indices
            .iter()
            .map(|&j| {
                if j >= self.cols {
                    Err(Error::IndexOutOfRange {
                        index: j,
                        cols: self.cols,
                    })
                } else {
                    Ok(self.col_dense(j))
                }
            })
            .collect()
    }

    /// New dense matrix made of the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<ColumnMatrix> {
        let cols = self.columns(indices)?;
        ColumnMatrix::from_columns(&cols)
    }

    pub(crate) fn sparse_parts(&self) -> Option<(&[usize], &[usize], &[f64])> {
        match &self.storage {
            Storage::Sparse {
                col_ptr,
                row_idx,
                values,
            } => Some((col_ptr, row_idx, values)),
            Storage::Dense(_) => None,
        }
    }
}

/// Ordered set of distinct column indices into a `ColumnMatrix`. The order
/// records the selection sequence, which greedy traces depend on.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnSet {
    indices: Vec<usize>,
}

impl ColumnSet {
    pub fn new() -> Self {
        ColumnSet::default()
    }

    pub fn from_indices(indices: Vec<usize>) -> Result<Self> {
        let mut seen = indices.clone();
        seen.sort_unstable();
        for pair in seen.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidParam(format!(
                    "duplicate column index {}",
                    pair[0]
                )));
            }
        }
        Ok(ColumnSet { indices })
    }

    pub fn push(&mut self, index: usize) -> Result<()> {
        if self.indices.contains(&index) {
            return Err(Error::AlreadySelected(index));
        }
        self.indices.push(index);
        Ok(())
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

/// Unit-normalized copies of the indexed columns. A zero-norm column is
/// reported as degenerate by its index.
pub fn normalized_columns(m: &ColumnMatrix, s: &ColumnSet) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(s.len());
    for j in s.iter() {
        if j >= m.cols() {
            return Err(Error::IndexOutOfRange {
                index: j,
                cols: m.cols(),
            });
        }
        let mut col = m.col_dense(j);
        let n = norm_sq(&col).sqrt();
        if n == 0.0 {
            return Err(Error::DegenerateColumn(j));
        }
        let inv = 1.0 / n;
        for v in &mut col {
            *v *= inv;
        }
        out.push(col);
    }
    Ok(out)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_construction_checks_shape_and_values() {
        assert!(matches!(
            ColumnMatrix::from_dense(0, 1, vec![]),
            Err(Error::EmptyMatrix)
        ));
        assert!(matches!(
            ColumnMatrix::from_dense(2, 2, vec![1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ColumnMatrix::from_dense(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn sparse_construction_drops_zeros_and_rejects_duplicates() {
        let m = ColumnMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 0.0)]).unwrap();
        assert!(m.is_sparse());
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        let (_, _, values) = m.sparse_parts().unwrap();
        assert_eq!(values.len(), 1);

        assert!(ColumnMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).is_err());
    }

    #[test]
    fn frobenius_matches_column_norms() {
        let m = ColumnMatrix::from_dense(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let by_cols: f64 = (0..2).map(|j| m.col_norm_sq(j)).sum();
        assert!((m.frobenius_sq() - by_cols).abs() < 1e-12);
        assert_eq!(m.frobenius_sq(), 91.0);
    }

    #[test]
    fn zero_matrix_has_zero_frobenius() {
        let m = ColumnMatrix::from_dense(2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(m.frobenius_sq(), 0.0);
    }

    #[test]
    fn identity_frobenius() {
        let mut data = vec![0.0; 9];
        for i in 0..3 {
            data[i * 3 + i] = 1.0;
        }
        let m = ColumnMatrix::from_dense(3, 3, data).unwrap();
        assert_eq!(m.frobenius_sq(), 3.0);
    }

    #[test]
    fn normalization_examples() {
        let m = ColumnMatrix::from_columns(&[vec![3.0, 4.0], vec![1.0, 0.0]]).unwrap();
        let set = ColumnSet::from_indices(vec![0, 1]).unwrap();
        let cols = normalized_columns(&m, &set).unwrap();
        assert!((cols[0][0] - 0.6).abs() < 1e-15);
        assert!((cols[0][1] - 0.8).abs() < 1e-15);
        assert_eq!(cols[1], vec![1.0, 0.0]);

        let m3 = ColumnMatrix::from_columns(&[vec![1.0, 1.0, 0.0]]).unwrap();
        let set3 = ColumnSet::from_indices(vec![0]).unwrap();
        let cols3 = normalized_columns(&m3, &set3).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((cols3[0][0] - s).abs() < 1e-15);
        assert!((cols3[0][1] - s).abs() < 1e-15);
        assert_eq!(cols3[0][2], 0.0);
    }

    #[test]
    fn normalization_rejects_zero_column_by_index() {
        let m = ColumnMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let set = ColumnSet::from_indices(vec![0, 1]).unwrap();
        match normalized_columns(&m, &set) {
            Err(Error::DegenerateColumn(1)) => {}
            other => panic!("expected DegenerateColumn(1), got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn column_set_rejects_duplicates() {
        assert!(ColumnSet::from_indices(vec![0, 1, 0]).is_err());
        let mut s = ColumnSet::new();
        s.push(3).unwrap();
        assert!(matches!(s.push(3), Err(Error::AlreadySelected(3))));
    }
}
