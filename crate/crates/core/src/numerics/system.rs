use alloc::vec;
use alloc::vec::Vec;

use super::{conjugate_gradient, norm2, BandedLu, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    /// Banded LU with partial pivoting after bandwidth reduction.
    Direct,
    /// Jacobi-preconditioned CG; symmetric positive definite systems only.
    ConjugateGradient { tol: f64, max_iter: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    /// `||A x - b||` for the system as solved (constraints applied).
    pub residual_norm: f64,
    pub iterations: usize,
}

/// A square system with Dirichlet constraints.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Prescribed value per dof, if any.
    pub constraints: Vec<Option<f64>>,
}

impl LinearSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Result<Self> {
        if rhs.len() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: matrix.dim(),
                found: rhs.len(),
            });
        }
        let n = rhs.len();
        Ok(LinearSystem {
            matrix,
            rhs,
            constraints: vec![None; n],
        })
    }

    pub fn constrain(&mut self, dof: usize, value: f64) {
        self.constraints[dof] = Some(value);
    }

    /// Replaces constrained rows by identity rows with the prescribed value
    /// on the right-hand side. With `symmetric`, the constrained columns are
    /// eliminated too (their contribution moved to the right-hand side) so a
    /// symmetric matrix stays symmetric.
    pub fn apply_constraints(&mut self, symmetric: bool) {
        let n = self.matrix.dim();
        for i in 0..n {
            if let Some(g) = self.constraints[i] {
                let cols: Vec<usize> = self.matrix.row_cols(i).to_vec();
                let vals = self.matrix.row_values_mut(i);
                for (v, &j) in vals.iter_mut().zip(&cols) {
                    *v = if j == i { 1.0 } else { 0.0 };
                }
                self.rhs[i] = g;
                if !cols.contains(&i) {
                    // structurally missing diagonal: rebuild with it present
                    let diag = CsrMatrix::from_diagonal(&{
                        let mut d = vec![0.0; n];
                        d[i] = 1.0;
                        d
                    });
                    self.matrix = self
                        .matrix
                        .linear_combination(1.0, &diag, 1.0)
                        .expect("same dimension");
                }
            } else if symmetric {
                let cols: Vec<usize> = self.matrix.row_cols(i).to_vec();
                let mut shift = 0.0;
                let vals = self.matrix.row_values_mut(i);
                for (v, &j) in vals.iter_mut().zip(&cols) {
                    if let Some(g) = self.constraints[j] {
                        shift += *v * g;
                        *v = 0.0;
                    }
                }
                self.rhs[i] -= shift;
            }
        }
    }

    pub fn solve(&self, kind: SolverKind) -> Result<Solution> {
        let (x, iterations) = match kind {
            SolverKind::Direct => {
                let lu = BandedLu::factor(&self.matrix)?;
                let mut x = lu.solve(&self.rhs);
                // one step of iterative refinement
                let r: Vec<f64> = self
                    .matrix
                    .mul_vec(&x)
                    .iter()
                    .zip(&self.rhs)
                    .map(|(ax, b)| b - ax)
                    .collect();
                let dx = lu.solve(&r);
                for (xi, d) in x.iter_mut().zip(dx) {
                    *xi += d;
                }
                (x, 1)
            }
            SolverKind::ConjugateGradient { tol, max_iter } => {
                let out = conjugate_gradient(&self.matrix, &self.rhs, None, tol, max_iter)?;
                (out.x, out.iterations)
            }
        };
        let r: Vec<f64> = self
            .matrix
            .mul_vec(&x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| ax - b)
            .collect();
        Ok(Solution {
            x,
            residual_norm: norm2(&r),
            iterations,
        })
    }
}

/// Solves `a x = b` directly, asserting the residual bound used throughout
/// the crate.
pub(crate) fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let sys = LinearSystem::new(a.clone(), b.to_vec())?;
    Ok(sys.solve(SolverKind::Direct)?.x)
}
