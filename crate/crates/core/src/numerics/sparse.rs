use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};

/// Square matrix in compressed-row form. Column indices are sorted and
/// unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Builds from raw parts; rows must have sorted unique columns.
    pub fn from_parts(n: usize, row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<f64>) -> Self {
        debug_assert_eq!(row_ptr.len(), n + 1);
        debug_assert_eq!(cols.len(), vals.len());
        debug_assert!((0..n).all(|i| {
            let r = &cols[row_ptr[i]..row_ptr[i + 1]];
            r.windows(2).all(|w| w[0] < w[1]) && r.iter().all(|&c| c < n)
        }));
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = dense[i * n + j];
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_values_mut(&mut self, i: usize) -> &mut [f64] {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        &mut self.vals[r]
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = self.row_cols(i);
        match cols.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row_values(i).iter().sum())
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n + 1];
        for &c in &self.cols {
            counts[c + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let k = next[j];
                cols[k] = i;
                vals[k] = v;
                next[j] += 1;
            }
        }
        CsrMatrix {
            n: self.n,
            row_ptr: counts,
            cols,
            vals,
        }
    }

    /// `a * self + b * other` on the union of both patterns.
    pub fn linear_combination(&self, a: f64, other: &CsrMatrix, b: f64) -> Result<CsrMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        row_ptr.push(0);
        let mut cols = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut vals = Vec::with_capacity(cols.capacity());
        for i in 0..self.n {
            let (ca, va) = (self.row_cols(i), self.row_values(i));
            let (cb, vb) = (other.row_cols(i), other.row_values(i));
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let take_a = q >= cb.len() || (p < ca.len() && ca[p] < cb[q]);
                let take_b = p >= ca.len() || (q < cb.len() && cb[q] < ca[p]);
                if take_a {
                    cols.push(ca[p]);
                    vals.push(a * va[p]);
                    p += 1;
                } else if take_b {
                    cols.push(cb[q]);
                    vals.push(b * vb[q]);
                    q += 1;
                } else {
                    cols.push(ca[p]);
                    vals.push(a * va[p] + b * vb[q]);
                    p += 1;
                    q += 1;
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(CsrMatrix {
            n: self.n,
            row_ptr,
            cols,
            vals,
        })
    }

    /// Diagonal matrix with the given entries.
    pub fn from_diagonal(d: &[f64]) -> CsrMatrix {
        CsrMatrix {
            n: d.len(),
            row_ptr: (0..=d.len()).collect(),
            cols: (0..d.len()).collect(),
            vals: d.to_vec(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i * self.n + j] = v;
            }
        }
        d
    }

    /// Matrix Market coordinate text (1-based indices).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "%%MatrixMarket matrix coordinate real general");
        let _ = writeln!(s, "{} {} {}", self.n, self.n, self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
            }
        }
        s
    }
}
