//! Minimal symmetric sparse matrix support: triplet assembly and a
//! compressed row form with the few operations the toolkit needs
//! (matrix-vector product, symmetry check, dense export for oracles).

use nalgebra::{DMatrix, DVector};

/// Triplet (COO) accumulator used during assembly. Duplicate entries add up.
#[derive(Debug, Clone)]
pub struct CooMatrix {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CooMatrix {
    pub fn new(n: usize) -> Self {
        CooMatrix { n, rows: Vec::new(), cols: Vec::new(), vals: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.rows.push(row);
        self.cols.push(col);
        self.vals.push(val);
    }

    /// Compress into CSR, summing duplicates in insertion order so that a
    /// matrix pushed with bitwise-symmetric pairs compresses to a bitwise
    /// symmetric CSR.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut order: Vec<usize> = (0..self.vals.len()).collect();
        order.sort_by_key(|&k| (self.rows[k], self.cols[k]));

        let mut kept_rows: Vec<usize> = Vec::with_capacity(order.len());
        let mut col_idx: Vec<usize> = Vec::with_capacity(order.len());
        let mut values: Vec<f64> = Vec::with_capacity(order.len());
        for &k in &order {
            let (r, c, v) = (self.rows[k], self.cols[k], self.vals[k]);
            if kept_rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *values.last_mut().unwrap() += v;
            } else {
                kept_rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        let mut row_ptr = vec![0usize; self.n + 1];
        for &r in &kept_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n: self.n, row_ptr, col_idx, values }
    }
}

/// Compressed sparse row matrix, square.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = DVector::zeros(self.n);
        for r in 0..self.n {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// Exact structural and numerical symmetry (bit equality of paired entries).
    pub fn is_symmetric(&self) -> bool {
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                let mirrored = self.get(c, r);
                if mirrored != Some(v) && !(v == 0.0 && mirrored.is_none()) {
                    return false;
                }
            }
        }
        true
    }

    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        let seg = &self.col_idx[lo..hi];
        seg.binary_search(&c).ok().map(|k| self.values[lo + k])
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }
}
