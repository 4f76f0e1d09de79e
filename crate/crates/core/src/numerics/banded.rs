use alloc::vec;
use alloc::vec::Vec;

use super::ordering::{bandwidths, reverse_cuthill_mckee};
use super::CsrMatrix;
use crate::error::{Error, Result};

/// LU factorisation with partial pivoting of a bandwidth-reduced copy of a
/// sparse matrix.
///
/// The matrix is first permuted symmetrically by reverse Cuthill-McKee.
/// Row `i` of the factor is stored densely over columns
/// `i - kl ..= i + kl + ku`, which is wide enough to hold the fill created
/// by row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    /// `perm[new] = old`
    perm: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with_ordering(a, perm)
    }

    pub fn factor_with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let (kl, ku) = bandwidths(a, &perm);
        let width = 2 * kl + ku + 1;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
            perm,
        };
        for old_i in 0..n {
            let i = inv[old_i];
            for (old_j, v) in a.row(old_i) {
                let j = inv[old_j];
                *lu.at_mut(i, j) = v;
            }
        }
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    fn eliminate(&mut self) -> Result<()> {
        let n = self.n;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut p = k;
            let mut best = self.at(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix { dof: self.perm[k] });
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.at(k, k);
            for i in k + 1..=last_row {
                let l = self.at(i, k) / pivot;
                if l == 0.0 {
                    continue;
                }
                *self.at_mut(i, k) = l;
                for j in k + 1..=last_col {
                    let u = self.at(k, j);
                    if u != 0.0 {
                        *self.at_mut(i, j) -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                    y[i] -= self.at(i, k) * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..=(k + self.kl + self.ku).min(n.saturating_sub(1)) {
                s -= self.at(k, j) * y[j];
            }
            y[k] = s / self.at(k, k);
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}
