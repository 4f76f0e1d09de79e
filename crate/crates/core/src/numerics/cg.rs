use alloc::vec;
use alloc::vec::Vec;

use super::{norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Achieved `||b - A x|| / ||b||`.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradient for symmetric positive definite
/// matrices.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r: Vec<f64> = a
        .mul_vec(&x)
        .iter()
        .zip(b)
        .map(|(ax, bi)| bi - ax)
        .collect();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut rel = norm2(&r) / b_norm;
    for it in 0..max_iter {
        if rel <= tol {
            return Ok(CgOutcome {
                x,
                iterations: it,
                relative_residual: rel,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = norm2(&r) / b_norm;
    }
    if rel <= tol {
        return Ok(CgOutcome {
            x,
            iterations: max_iter,
            relative_residual: rel,
        });
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: rel,
    })
}
