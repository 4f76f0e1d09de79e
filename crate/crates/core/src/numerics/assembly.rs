use alloc::vec::Vec;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// One element's dense block and/or load vector together with its global
/// dof map. `matrix` is row-major `dofs.len()` squared.
#[derive(Debug, Clone, Default)]
pub struct ElementContribution {
    pub dofs: Vec<usize>,
    pub matrix: Option<Vec<f64>>,
    pub vector: Option<Vec<f64>>,
}

/// Accumulates element contributions into a global matrix and vector.
///
/// Every global entry is reduced from its contributions sorted by value, so
/// the result is bitwise independent of the order in which elements arrive.
#[derive(Debug, Clone)]
pub struct Assembler {
    n: usize,
    triplets: Vec<(usize, usize, f64)>,
    entries: Vec<(usize, f64)>,
}

impl Assembler {
    pub fn new(n: usize) -> Self {
        Assembler {
            n,
            triplets: Vec::new(),
            entries: Vec::new(),
        }
    }

    fn check(&self, dofs: &[usize]) -> Result<()> {
        match dofs.iter().find(|&&d| d >= self.n) {
            Some(&d) => Err(Error::DimensionMismatch {
                expected: self.n,
                found: d + 1,
            }),
            None => Ok(()),
        }
    }

    pub fn add_matrix(&mut self, dofs: &[usize], block: &[f64]) -> Result<()> {
        self.check(dofs)?;
        let m = dofs.len();
        if block.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                found: block.len(),
            });
        }
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                self.triplets.push((i, j, block[a * m + b]));
            }
        }
        Ok(())
    }

    pub fn add_vector(&mut self, dofs: &[usize], values: &[f64]) -> Result<()> {
        self.check(dofs)?;
        if values.len() != dofs.len() {
            return Err(Error::DimensionMismatch {
                expected: dofs.len(),
                found: values.len(),
            });
        }
        self.entries
            .extend(dofs.iter().copied().zip(values.iter().copied()));
        Ok(())
    }

    pub fn add(&mut self, c: &ElementContribution) -> Result<()> {
        if let Some(m) = &c.matrix {
            self.add_matrix(&c.dofs, m)?;
        }
        if let Some(v) = &c.vector {
            self.add_vector(&c.dofs, v)?;
        }
        Ok(())
    }

    pub fn finish_matrix(mut self) -> CsrMatrix {
        self.triplets.sort_unstable_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then_with(|| a.2.total_cmp(&b.2))
        });
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut row = 0;
        let mut k = 0;
        while k < self.triplets.len() {
            let (i, j, _) = self.triplets[k];
            while row < i {
                row_ptr.push(cols.len());
                row += 1;
            }
            let mut sum = 0.0;
            while k < self.triplets.len() && self.triplets[k].0 == i && self.triplets[k].1 == j {
                sum += self.triplets[k].2;
                k += 1;
            }
            cols.push(j);
            vals.push(sum);
        }
        while row < self.n {
            row_ptr.push(cols.len());
            row += 1;
        }
        CsrMatrix::from_parts(self.n, row_ptr, cols, vals)
    }

    pub fn finish_vector(&mut self) -> Vec<f64> {
        let mut entries = core::mem::take(&mut self.entries);
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.total_cmp(&b.1)));
        let mut out = alloc::vec![0.0; self.n];
        for (i, v) in entries {
            out[i] += v;
        }
        out
    }

    pub fn finish(mut self) -> (CsrMatrix, Vec<f64>) {
        let v = self.finish_vector();
        (self.finish_matrix(), v)
    }
}

/// Assembles a stream of element contributions into an `n`-dof matrix and
/// right-hand side.
pub fn assemble<'a, I>(n: usize, contributions: I) -> Result<(CsrMatrix, Vec<f64>)>
where
    I: IntoIterator<Item = &'a ElementContribution>,
{
    let mut asm = Assembler::new(n);
    for c in contributions {
        asm.add(c)?;
    }
    Ok(asm.finish())
}
