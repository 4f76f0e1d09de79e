//! Isotropic volumetric growth driven by the SMC density.
//!
//! The growth part of the deformation gradient is `F_g = theta I` in the
//! grown directions. Volume balance gives the total stretch
//! `theta = (1 + J (rS/rSh - 1))^(1/d)`; between coupled steps the
//! incremental form `theta = theta_prev (1 + (J/J_prev)(rS/rSh - 1))^(1/d)`
//! is used.

use crate::error::{Error, Result};
use crate::math::root;

/// Growth variables at one Gauss point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthState {
    pub theta: f64,
    /// Stretch at the last accepted coupled step.
    pub theta_prev: f64,
    /// `det F` at the last accepted coupled step.
    pub j_prev: f64,
}

impl Default for GrowthState {
    fn default() -> Self {
        GrowthState {
            theta: 1.0,
            theta_prev: 1.0,
            j_prev: 1.0,
        }
    }
}

impl GrowthState {
    /// Accepts the current step: `theta_prev <- theta`, `j_prev <- j`.
    pub fn commit(&mut self, j: f64) {
        self.theta_prev = self.theta;
        self.j_prev = j;
    }
}

/// Growth law constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthLaw {
    /// Healthy SMC density.
    pub rho_s_h: f64,
    /// Number of grown directions (3 axisymmetric, 2 plane).
    pub dimension: u32,
}

impl GrowthLaw {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_s_h > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rho_s_h",
                reason: alloc::format!("must be positive, got {}", self.rho_s_h),
            });
        }
        if !(2..=3).contains(&self.dimension) {
            return Err(Error::InvalidParameter {
                name: "dimension",
                reason: alloc::format!("must be 2 or 3, got {}", self.dimension),
            });
        }
        Ok(())
    }

    /// Stretch and its derivative with respect to `J` for the given state.
    pub fn evaluate(&self, state: &GrowthState, j: f64, rho_s: f64) -> Result<(f64, f64)> {
        growth_stretch_with_derivative(
            state.theta_prev,
            j,
            state.j_prev,
            rho_s,
            self.rho_s_h,
            self.dimension,
        )
    }
}

/// `theta_prev (1 + (J/J_prev)(rho_s/rho_s_h - 1))^(1/d)`
pub fn growth_stretch_incremental(
    theta_prev: f64,
    j: f64,
    j_prev: f64,
    rho_s: f64,
    rho_s_h: f64,
    d: u32,
) -> Result<f64> {
    growth_stretch_with_derivative(theta_prev, j, j_prev, rho_s, rho_s_h, d).map(|(t, _)| t)
}

/// Returns `(theta, d theta / d J)` at fixed `rho_s`.
pub fn growth_stretch_with_derivative(
    theta_prev: f64,
    j: f64,
    j_prev: f64,
    rho_s: f64,
    rho_s_h: f64,
    d: u32,
) -> Result<(f64, f64)> {
    if !(theta_prev > 0.0) || !(j > 0.0) || !(j_prev > 0.0) {
        return Err(Error::InvertedDeformation {
            det: if j > 0.0 { j_prev.min(theta_prev) } else { j },
        });
    }
    let s = rho_s / rho_s_h - 1.0;
    let base = 1.0 + j / j_prev * s;
    if !(base > 0.0) {
        return Err(Error::GrowthBaseNonPositive { base });
    }
    let theta = theta_prev * root(base, d);
    let dtheta_dj = theta * s / (d as f64 * base * j_prev);
    Ok((theta, dtheta_dj))
}
