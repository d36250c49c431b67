//! Minimal CSR sparse matrix, enough for the graph-side products the model
//! needs: sparse x dense multiplication and transposition.
//!
//! Products are parallel over output rows; each row is reduced in a fixed
//! order, so results are bit-identical regardless of thread count.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

/// Compressed sparse row matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; each row must be sorted
    /// by column with no duplicates.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> CsrMatrix {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for &(c, v) in row {
                assert!(c < ncols);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Unit-valued rows, e.g. a sparse 0/1 indicator matrix.
    pub fn from_index_rows(ncols: usize, rows: &[Vec<usize>]) -> CsrMatrix {
        let rows: Vec<Vec<(usize, f64)>> = rows
            .iter()
            .map(|r| r.iter().map(|&c| (c, 1.0)).collect())
            .collect();
        CsrMatrix::from_rows(ncols, &rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// (columns, values) of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().sum())
            .collect()
    }

    /// `self * rhs` into a dense matrix.
    pub fn matmul_dense(&self, rhs: &ArrayView2<f64>) -> Array2<f64> {
        assert_eq!(
            self.ncols,
            rhs.nrows(),
            "sparse-dense shape mismatch: {}x{} * {}x{}",
            self.nrows,
            self.ncols,
            rhs.nrows(),
            rhs.ncols()
        );
        let mut out = Array2::zeros((self.nrows, rhs.ncols()));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut out_row)| {
                let (cols, vals) = self.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    out_row.scaled_add(v, &rhs.row(c));
                }
            });
        out
    }

    /// Transpose, also in CSR form (counting sort over columns; deterministic).
    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols];
        for &c in &self.col_idx {
            counts[c] += 1;
        }
        let mut row_ptr = vec![0usize; self.ncols + 1];
        for (c, &k) in counts.iter().enumerate() {
            row_ptr[c + 1] = row_ptr[c] + k;
        }
        let mut next = row_ptr[..self.ncols].to_vec();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0f64; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                col_idx[next[c]] = i;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[(i, c)] = v;
            }
        }
        out
    }
}
