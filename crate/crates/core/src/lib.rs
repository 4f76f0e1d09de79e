//! Finite-element kernels for a coupled model of in-stent restenosis.
//!
//! Three species live in the arterial wall: PDGF (diffusing growth factor),
//! ECM (non-diffusive collagen matrix) and SMC (smooth muscle cells). Their
//! transport is advanced with semi-implicit backward Euler on linear finite
//! elements, stabilised by algebraic flux-corrected transport. The SMC
//! density drives isotropic volumetric growth of an anisotropic
//! hyperelastic wall, and the two problems are coupled by a staggered
//! scheme.
//!
//! The crate is `no_std` + `alloc`. File formats, output writers and the
//! command-line driver live in the `restenosim` companion crate.
//!
//! Modules:
//! - [`mesh`]: 2D linear triangles and bilinear quads, plane or axisymmetric.
//! - [`numerics`]: compressed-row matrices, deterministic assembly, solvers.
//! - [`transport`]: element operators and the three species updates.
//! - [`fct`]: artificial diffusion and Zalesak flux limiting.
//! - [`mechanics`]: growth kinematics, constitutive law, Newton solve.
//! - [`coupling`]: the staggered transport/mechanics driver.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod coupling;
pub mod error;
pub mod fct;
pub mod math;
pub mod mechanics;
pub mod mesh;
pub mod numerics;
mod par;
pub mod transport;

pub use error::{Error, Result};
