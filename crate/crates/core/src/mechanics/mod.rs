//! Growth kinematics, the anisotropic hyperelastic law and the
//! equilibrium solve.

mod growth;
mod material;
mod solver;
pub mod tensor;

pub use growth::{
    growth_stretch_incremental, growth_stretch_with_derivative, GrowthLaw, GrowthState,
};
pub use material::{
    free_energy, growth_gradient, material_tangent, pk1_stress, stress_increment, Kinematics,
    MaterialParams, StructureTensors, FIBER_EXPONENT_LIMIT,
};
pub use solver::{
    assemble_residual, deformation_gradient, newton_solve, GaussResponse, GrowthDrive,
    MechanicsProblem, NewtonOptions, NewtonOutcome, Traction,
};
