//! Anisotropic hyperelastic response of the grown wall.
//!
//! With `F_e = F G^-1`, `C_e = F_e^T F_e` and `J_e = det F_e`:
//!
//! ```text
//! psi_iso = mu/2 (tr C_e - 3) - mu ln J_e + lambda/4 (J_e^2 - 1 - 2 ln J_e)
//! psi_ani = k1/(2 k2) sum_i (exp(k2 <E_i>^2) - 1),   E_i = H_i : C_e - 1
//! ```
//!
//! `<.>` is the Macaulay bracket, so fibres carry load in tension only.

use super::tensor::{self, Mat3, Tensor4};
use crate::error::{Error, Result};
use crate::math::{cos, exp, ln, sin};
use crate::mesh::Mode;

/// Largest admissible fibre exponent `k2 E^2`.
pub const FIBER_EXPONENT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Shear modulus (MPa).
    pub mu: f64,
    /// Bulk-like Lame constant (MPa).
    pub lambda: f64,
    /// Fibre stiffness (MPa).
    pub k1: f64,
    /// Fibre exponential coefficient.
    pub k2: f64,
    /// Fibre dispersion, `0 <= kappa <= 1/3`.
    pub kappa: f64,
    /// Fibre angle from the circumferential direction (degrees).
    pub fiber_angle_deg: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            mu: 0.02,
            lambda: 10.0,
            k1: 0.112,
            k2: 20.61,
            kappa: 0.1,
            fiber_angle_deg: 41.0,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("k1", self.k1),
            ("k2", self.k2),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: alloc::format!("must be positive, got {v}"),
                });
            }
        }
        if !(0.0..=1.0 / 3.0).contains(&self.kappa) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: alloc::format!("must lie in [0, 1/3], got {}", self.kappa),
            });
        }
        if !self.fiber_angle_deg.is_finite() {
            return Err(Error::InvalidParameter {
                name: "fiber_angle_deg",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

/// Two generalised structure tensors `H_i = kappa I + (1 - 3 kappa) a_i (x) a_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureTensors {
    pub a: [[f64; 3]; 2],
    pub h: [Mat3; 2],
}

impl StructureTensors {
    pub fn new(a01: [f64; 3], a02: [f64; 3], kappa: f64) -> Self {
        let build = |a: [f64; 3]| {
            let n = crate::math::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
            let a = [a[0] / n, a[1] / n, a[2] / n];
            let mut h = tensor::scale(&tensor::IDENTITY, kappa);
            tensor::axpy(&mut h, 1.0 - 3.0 * kappa, &tensor::outer(&a, &a));
            (a, h)
        };
        let (a1, h1) = build(a01);
        let (a2, h2) = build(a02);
        StructureTensors {
            a: [a1, a2],
            h: [h1, h2],
        }
    }

    /// Fibres at `+-angle` from the circumferential direction, which is the
    /// out-of-plane axis (index 2) of the section, tilted towards the axial
    /// axis of the mode.
    pub fn for_mode(mode: Mode, mat: &MaterialParams) -> Self {
        let t = mat.fiber_angle_deg.to_radians();
        let axial = mode.axial_axis();
        let mut a1 = [0.0; 3];
        let mut a2 = [0.0; 3];
        a1[2] = cos(t);
        a2[2] = cos(t);
        a1[axial] = sin(t);
        a2[axial] = -sin(t);
        Self::new(a1, a2, mat.kappa)
    }
}

/// Deformation at a material point together with its growth split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub f: Mat3,
    pub c: Mat3,
    pub j: f64,
    pub theta: f64,
    /// Inverse growth tensor, diagonal.
    pub g_inv: Mat3,
    pub f_e: Mat3,
    pub c_e: Mat3,
    pub j_e: f64,
    pub growth_dimension: u32,
}

impl Kinematics {
    /// `growth_dimension = 3` grows all three directions (`C_e = C / theta^2`);
    /// `2` leaves the out-of-plane axis ungrown.
    pub fn new(f: Mat3, theta: f64, growth_dimension: u32) -> Result<Self> {
        let j = tensor::det(&f);
        if !(j > 0.0) {
            return Err(Error::InvertedDeformation { det: j });
        }
        if !(theta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: alloc::format!("must be positive, got {theta}"),
            });
        }
        let g_inv = growth_inverse(theta, growth_dimension);
        let f_e = tensor::mul(&f, &g_inv);
        let c_e = tensor::tmul(&f_e, &f_e);
        let j_e = j * g_inv[0][0] * g_inv[1][1] * g_inv[2][2];
        Ok(Kinematics {
            f,
            c: tensor::tmul(&f, &f),
            j,
            theta,
            g_inv,
            f_e,
            c_e,
            j_e,
            growth_dimension,
        })
    }
}

fn growth_inverse(theta: f64, d: u32) -> Mat3 {
    let t = 1.0 / theta;
    tensor::diag([t, t, if d >= 3 { t } else { 1.0 }])
}

fn fiber_strains(c_e: &Mat3, h: &StructureTensors) -> [f64; 2] {
    [
        tensor::ddot(&h.h[0], c_e) - 1.0,
        tensor::ddot(&h.h[1], c_e) - 1.0,
    ]
}

fn fiber_exponent(mat: &MaterialParams, e: f64) -> Result<f64> {
    let arg = mat.k2 * e * e;
    if arg > FIBER_EXPONENT_LIMIT {
        return Err(Error::FiberOverflow { argument: arg });
    }
    Ok(exp(arg))
}

/// Strain energy per reference volume (MPa).
pub fn free_energy(kin: &Kinematics, h: &StructureTensors, mat: &MaterialParams) -> Result<f64> {
    let ln_je = ln(kin.j_e);
    let iso = 0.5 * mat.mu * (tensor::trace(&kin.c_e) - 3.0) - mat.mu * ln_je
        + 0.25 * mat.lambda * (kin.j_e * kin.j_e - 1.0 - 2.0 * ln_je);
    let mut ani = 0.0;
    for e in fiber_strains(&kin.c_e, h) {
        if e > 0.0 {
            ani += mat.k1 / (2.0 * mat.k2) * (fiber_exponent(mat, e)? - 1.0);
        }
    }
    Ok(iso + ani)
}

/// Elastic second Piola-Kirchhoff stress `S_e = 2 d psi / d C_e`.
fn elastic_pk2(
    kin: &Kinematics,
    h: &StructureTensors,
    mat: &MaterialParams,
) -> Result<(Mat3, Mat3)> {
    let c_inv = tensor::inverse(&kin.c_e).ok_or(Error::InvertedDeformation { det: kin.j_e })?;
    let mut s = tensor::scale(&tensor::IDENTITY, mat.mu);
    let vol = 0.5 * mat.lambda * (kin.j_e * kin.j_e - 1.0) - mat.mu;
    tensor::axpy(&mut s, vol, &c_inv);
    for (i, e) in fiber_strains(&kin.c_e, h).into_iter().enumerate() {
        if e > 0.0 {
            tensor::axpy(&mut s, 2.0 * mat.k1 * e * fiber_exponent(mat, e)?, &h.h[i]);
        }
    }
    Ok((s, c_inv))
}

/// First Piola-Kirchhoff stress `P = F_e S_e G^-T`.
pub fn pk1_stress(kin: &Kinematics, h: &StructureTensors, mat: &MaterialParams) -> Result<Mat3> {
    let (s, _) = elastic_pk2(kin, h, mat)?;
    Ok(tensor::mul(&tensor::mul(&kin.f_e, &s), &kin.g_inv))
}

/// `C_e-tangent : X` for symmetric `X`, i.e. `2 dS_e/dC_e : X`.
fn elastic_moduli_apply(
    kin: &Kinematics,
    h: &StructureTensors,
    mat: &MaterialParams,
    c_inv: &Mat3,
    x: &Mat3,
) -> Result<Mat3> {
    let j2 = kin.j_e * kin.j_e;
    let mut out = tensor::scale(c_inv, mat.lambda * j2 * tensor::ddot(c_inv, x));
    let cxc = tensor::mul(&tensor::mul(c_inv, x), c_inv);
    tensor::axpy(&mut out, 2.0 * mat.mu - mat.lambda * (j2 - 1.0), &cxc);
    for (i, e) in fiber_strains(&kin.c_e, h).into_iter().enumerate() {
        if e > 0.0 {
            let w = 4.0 * mat.k1 * fiber_exponent(mat, e)? * (1.0 + 2.0 * mat.k2 * e * e);
            tensor::axpy(&mut out, w * tensor::ddot(&h.h[i], x), &h.h[i]);
        }
    }
    Ok(out)
}

/// Directional derivative of `P` for an increment `(dF, dtheta)`.
pub fn stress_increment(
    kin: &Kinematics,
    h: &StructureTensors,
    mat: &MaterialParams,
    df: &Mat3,
    dtheta: f64,
) -> Result<Mat3> {
    let (s, c_inv) = elastic_pk2(kin, h, mat)?;
    let mut dg_inv = tensor::ZERO;
    let grown = if kin.growth_dimension >= 3 { 3 } else { 2 };
    for k in 0..grown {
        let g = kin.g_inv[k][k];
        dg_inv[k][k] = -g * g * dtheta;
    }
    let df_e = tensor::add(&tensor::mul(df, &kin.g_inv), &tensor::mul(&kin.f, &dg_inv));
    let a = tensor::tmul(&df_e, &kin.f_e);
    let dc_e = tensor::add(&a, &tensor::transpose(&a));
    let ds = tensor::scale(&elastic_moduli_apply(kin, h, mat, &c_inv, &dc_e)?, 0.5);
    let mut dp = tensor::mul(&tensor::mul(&df_e, &s), &kin.g_inv);
    dp = tensor::add(&dp, &tensor::mul(&tensor::mul(&kin.f_e, &ds), &kin.g_inv));
    dp = tensor::add(&dp, &tensor::mul(&tensor::mul(&kin.f_e, &s), &dg_inv));
    Ok(dp)
}

/// `A = dP/dF + dP/dtheta (x) dtheta/dF`, flattened as `A[3i+J][3k+L]`.
pub fn material_tangent(
    kin: &Kinematics,
    h: &StructureTensors,
    mat: &MaterialParams,
    dtheta_df: &Mat3,
) -> Result<Tensor4> {
    let mut a = [[0.0; 9]; 9];
    let dp_dtheta = stress_increment(kin, h, mat, &tensor::ZERO, 1.0)?;
    for q in 0..9 {
        let (k, l) = (q / 3, q % 3);
        let dp = stress_increment(kin, h, mat, &tensor::unit(k, l), 0.0)?;
        for p in 0..9 {
            let (i, jj) = (p / 3, p % 3);
            a[p][q] = dp[i][jj] + dp_dtheta[i][jj] * dtheta_df[k][l];
        }
    }
    Ok(a)
}

/// `d theta/dF = d theta/dJ * J F^-T`.
pub fn growth_gradient(f: &Mat3, dtheta_dj: f64) -> Result<Mat3> {
    let j = tensor::det(f);
    let f_inv = tensor::inverse(f).ok_or(Error::InvertedDeformation { det: j })?;
    Ok(tensor::scale(&tensor::transpose(&f_inv), dtheta_dj * j))
}
