//! Sparse storage, deterministic assembly and linear solvers shared by the
//! transport and mechanics problems.

mod assembly;
mod banded;
mod cg;
mod ordering;
mod sparse;
mod system;

pub use assembly::{assemble, Assembler, ElementContribution};
pub use banded::BandedLu;
pub use cg::{conjugate_gradient, CgOutcome};
pub use ordering::reverse_cuthill_mckee;
pub use sparse::CsrMatrix;
pub(crate) use system::solve_direct;
pub use system::{LinearSystem, Solution, SolverKind};

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    crate::math::sqrt(v.iter().map(|x| x * x).sum())
}
