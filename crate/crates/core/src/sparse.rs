//! Row-sparse design matrices and evaluation counters.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::vecops;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SparseError {
    #[error("row {row}: column index {col} out of range for {cols} columns")]
    ColumnOutOfRange { row: usize, col: usize, cols: usize },
    #[error("row {row}: column indices must strictly increase")]
    NonIncreasing { row: usize },
    #[error("expected {expected} targets, got {got}")]
    TargetLength { expected: usize, got: usize },
    #[error("dimension mismatch: expected vector of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("dense buffer has {got} entries, expected {expected}")]
    DenseShape { expected: usize, got: usize },
    #[error("non-finite entry in row {row}")]
    NonFinite { row: usize },
}

/// Evaluation counters for one solver run.
///
/// `f_ev`, `g_ev` and `p_ev` count objective, gradient and proximal
/// evaluations; `mvm` counts products with `A` or `Aᵀ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounters {
    pub f_ev: u64,
    pub g_ev: u64,
    pub p_ev: u64,
    pub mvm: u64,
}

impl EvalCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// True when every counter in `self` is at least the one in `earlier`.
    pub fn dominates(&self, earlier: &EvalCounters) -> bool {
        self.f_ev >= earlier.f_ev
            && self.g_ev >= earlier.g_ev
            && self.p_ev >= earlier.p_ev
            && self.mvm >= earlier.mvm
    }
}

/// Design matrix `A ∈ R^{p×n}` in compressed-row form together with the
/// target vector `b ∈ R^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDesign {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    targets: Vec<f64>,
}

impl SparseDesign {
    /// Builds a design from per-row `(column, value)` lists.
    pub fn from_rows(
        cols: usize,
        rows: Vec<Vec<(usize, f64)>>,
        targets: Vec<f64>,
    ) -> Result<Self, SparseError> {
        if rows.len() != targets.len() {
            return Err(SparseError::TargetLength {
                expected: rows.len(),
                got: targets.len(),
            });
        }
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for (r, row) in rows.into_iter().enumerate() {
            let mut prev: Option<usize> = None;
            for (c, v) in row {
                if c >= cols {
                    return Err(SparseError::ColumnOutOfRange { row: r, col: c, cols });
                }
                if prev.is_some_and(|p| c <= p) {
                    return Err(SparseError::NonIncreasing { row: r });
                }
                if !v.is_finite() {
                    return Err(SparseError::NonFinite { row: r });
                }
                prev = Some(c);
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows: targets.len(),
            cols,
            indptr,
            indices,
            values,
            targets,
        })
    }

    /// Builds a design from a row-major dense buffer, dropping exact zeros.
    pub fn from_dense(
        rows: usize,
        cols: usize,
        data: &[f64],
        targets: Vec<f64>,
    ) -> Result<Self, SparseError> {
        if data.len() != rows * cols {
            return Err(SparseError::DenseShape {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let row_lists = data
            .chunks(cols.max(1))
            .take(rows)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(cols, row_lists, targets)
    }

    /// Number of samples `p`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of features `n`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Stored `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// True when every target is exactly `+1` or `-1`.
    pub fn has_binary_labels(&self) -> bool {
        self.targets.iter().all(|&b| b == 1.0 || b == -1.0)
    }

    /// `A v` (or `Aᵀ v` when `transpose`), counting one matrix-vector product.
    pub fn matvec(
        &self,
        v: &[f64],
        transpose: bool,
        counters: &mut EvalCounters,
    ) -> Result<Vec<f64>, SparseError> {
        let expected = if transpose { self.rows } else { self.cols };
        if v.len() != expected {
            return Err(SparseError::Dimension {
                expected,
                got: v.len(),
            });
        }
        counters.mvm += 1;
        if transpose {
            let mut out = vec![0.0; self.cols];
            for (r, &vr) in v.iter().enumerate() {
                if vr == 0.0 {
                    continue;
                }
                for k in self.indptr[r]..self.indptr[r + 1] {
                    out[self.indices[k]] += self.values[k] * vr;
                }
            }
            Ok(out)
        } else {
            Ok((0..self.rows)
                .map(|r| {
                    (self.indptr[r]..self.indptr[r + 1])
                        .map(|k| self.values[k] * v[self.indices[k]])
                        .sum()
                })
                .collect())
        }
    }

    /// Largest eigenvalue of `AᵀA` by power iteration.
    ///
    /// Products made here are not charged to any solver run.
    pub fn gram_spectral_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let mut scratch = EvalCounters::new();
        // deterministic, non-symmetric start so it is unlikely to be orthogonal
        // to the leading eigenvector
        let mut v: Vec<f64> = (0..self.cols)
            .map(|i| 1.0 + 1e-3 * ((i * 7919 % 104_729) as f64 / 104_729.0))
            .collect();
        let nv = vecops::norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut lambda = 0.0;
        for _ in 0..5_000 {
            let av = self.matvec(&v, false, &mut scratch).expect("dimension checked");
            let w = self.matvec(&av, true, &mut scratch).expect("dimension checked");
            let next = vecops::dot(&v, &w);
            let nw = vecops::norm(&w);
            if nw == 0.0 {
                return 0.0;
            }
            v = w.into_iter().map(|x| x / nw).collect();
            let converged = (next - lambda).abs() <= 1e-14 * next.abs();
            lambda = next;
            if converged {
                break;
            }
        }
        // for unit v, ‖AᵀAv‖ lies between the Rayleigh quotient and λ_max
        let av = self.matvec(&v, false, &mut scratch).expect("dimension checked");
        let w = self.matvec(&av, true, &mut scratch).expect("dimension checked");
        vecops::norm(&w).max(lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn diag12() -> SparseDesign {
        SparseDesign::from_rows(2, vec![vec![(0, 1.0)], vec![(1, 2.0)]], vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn matvec_small() {
        let a = diag12();
        let mut c = EvalCounters::new();
        assert_eq!(a.matvec(&[3.0, 4.0], false, &mut c).unwrap(), vec![3.0, 8.0]);
        assert_eq!(c.mvm, 1);
        assert_eq!(a.matvec(&[3.0, 8.0], true, &mut c).unwrap(), vec![3.0, 16.0]);
        assert_eq!(c.mvm, 2);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let a = diag12();
        let mut c = EvalCounters::new();
        assert!(matches!(
            a.matvec(&[1.0, 2.0, 3.0], false, &mut c),
            Err(SparseError::Dimension { expected: 2, got: 3 })
        ));
        assert_eq!(c.mvm, 0);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            SparseDesign::from_rows(2, vec![vec![(1, 1.0), (0, 1.0)]], vec![1.0]),
            Err(SparseError::NonIncreasing { row: 0 })
        ));
        assert!(matches!(
            SparseDesign::from_rows(2, vec![vec![(2, 1.0)]], vec![1.0]),
            Err(SparseError::ColumnOutOfRange { .. })
        ));
        assert!(matches!(
            SparseDesign::from_rows(2, vec![vec![]], vec![]),
            Err(SparseError::TargetLength { .. })
        ));
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = diag12();
        assert!((a.gram_spectral_norm() - 4.0).abs() < 1e-12);
    }
}
