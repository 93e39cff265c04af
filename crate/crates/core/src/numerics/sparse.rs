use crate::error::{BclError, Result};
use crate::numerics::DenseMatrix;

/// Compressed sparse row matrix with column indices sorted ascending per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicate coordinates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= rows || c >= cols {
                return Err(BclError::dims(
                    "CsrMatrix::from_triplets",
                    format!("index < ({rows}, {cols})"),
                    format!("({r}, {c})"),
                ));
            }
        }
        triplets.sort_by_key(|t| (t.0, t.1));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(col, value)` of row `r` in ascending column order.
    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => 0.0,
        }
    }

    /// `self · h`, accumulating each output row in ascending column order.
    pub fn spmm(&self, h: &DenseMatrix) -> Result<DenseMatrix> {
        if h.rows() != self.cols {
            return Err(BclError::dims("spmm", self.cols, h.rows()));
        }
        let d = h.cols();
        let mut out = vec![0.0; self.rows * d];
        for r in 0..self.rows {
            let out_row = &mut out[r * d..(r + 1) * d];
            for (c, v) in self.row_entries(r) {
                for (o, x) in out_row.iter_mut().zip(h.row(c)) {
                    *o += v * x;
                }
            }
        }
        Ok(DenseMatrix::from_raw(self.rows, d, out))
    }

    /// `selfᵀ · h`, scattering rows of `h` in ascending row order.
    pub fn spmm_transpose(&self, h: &DenseMatrix) -> Result<DenseMatrix> {
        if h.rows() != self.rows {
            return Err(BclError::dims("spmm_transpose", self.rows, h.rows()));
        }
        let d = h.cols();
        let mut out = vec![0.0; self.cols * d];
        for r in 0..self.rows {
            let h_row = h.row(r);
            for (c, v) in self.row_entries(r) {
                for (o, x) in out[c * d..(c + 1) * d].iter_mut().zip(h_row) {
                    *o += v * x;
                }
            }
        }
        Ok(DenseMatrix::from_raw(self.cols, d, out))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row_entries(r) {
                m.set(r, c, v);
            }
        }
        m
    }
}
