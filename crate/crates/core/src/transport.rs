//! PDGF, ECM and SMC transport on the current configuration.
//!
//! Each species is advanced by semi-implicit backward Euler: the unknown
//! field is implicit, every other coefficient is frozen at step `n`.
//!
//! ```text
//! PDGF: [M + dt L + dt P] c^{n+1}   = M c^n
//! ECM:  [M + dt T]        rE^{n+1}  = M rE^n + dt R
//! SMC:  [M + dt K - dt Q] rS^{n+1}  = M rS^n
//! ```

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fct::{fct_step, FctOptions};
use crate::mesh::Mesh;
use crate::numerics::{solve_direct, Assembler, CsrMatrix};
use crate::par::map_indexed;

/// Transport coefficients. Units: mm, day, mol, cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportParams {
    /// PDGF diffusivity (mm^2/day).
    pub d_p: f64,
    /// PDGF internalisation by SMC (mm^3/cell/day).
    pub alpha: f64,
    /// ECM synthesis by SMC (mol/cell/day).
    pub beta: f64,
    /// ECM degradation through PDGF-regulated MMP (mm^3/mol/day).
    pub gamma: f64,
    /// Chemotactic sensitivity (mm^5/cell/day).
    pub chi: f64,
    /// Proliferation constant (mm^3/mol/cell/day).
    pub kappa: f64,
    /// Asymptotic collagen density (mol/mm^3).
    pub rho_e_th: f64,
    /// Healthy SMC density (cells/mm^3).
    pub rho_s_h: f64,
}

impl Default for TransportParams {
    fn default() -> Self {
        TransportParams {
            d_p: 0.01,
            alpha: 1.0e-13,
            beta: 5.0e-8,
            gamma: 5.0e17,
            chi: 1.0e19,
            kappa: 1.0e-2,
            rho_e_th: 1.1 * 7.0e-9,
            rho_s_h: 3.16e6,
        }
    }
}

impl TransportParams {
    /// Diffusivity and reference densities must be positive; rate constants
    /// may be zero, which switches the corresponding mechanism off.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_p", self.d_p),
            ("rho_e_th", self.rho_e_th),
            ("rho_s_h", self.rho_s_h),
        ];
        let non_negative = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("chi", self.chi),
            ("kappa", self.kappa),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: alloc::format!("must be positive and finite, got {v:e}"),
                });
            }
        }
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: alloc::format!("must be non-negative and finite, got {v:e}"),
                });
            }
        }
        Ok(())
    }

    /// Logistic ECM factor `1 - rho_E / rho_E,th`.
    #[inline]
    pub fn degradation(&self, rho_e: f64) -> f64 {
        1.0 - rho_e / self.rho_e_th
    }
}

/// Nodal transport fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// PDGF concentration (mol/mm^3).
    pub c_p: Vec<f64>,
    /// ECM density (mol/mm^3).
    pub rho_e: Vec<f64>,
    /// SMC density (cells/mm^3).
    pub rho_s: Vec<f64>,
    /// Time (day).
    pub time: f64,
}

impl FieldState {
    pub fn uniform(n: usize, c_p: f64, rho_e: f64, rho_s: f64) -> Self {
        FieldState {
            c_p: vec![c_p; n],
            rho_e: vec![rho_e; n],
            rho_s: vec![rho_s; n],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.c_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_p.is_empty()
    }

    /// Checks `c_P >= 0`, `rho_S >= 0` and `0 <= rho_E <= rho_E,th` up to a
    /// relative slack of `1e-12`.
    pub fn check_invariants(&self, params: &TransportParams) -> core::result::Result<(), String> {
        let c_scale = max_abs(&self.c_p);
        let s_scale = max_abs(&self.rho_s);
        let e_tol = 1e-12 * params.rho_e_th;
        for i in 0..self.len() {
            if self.c_p[i] < -1e-12 * c_scale {
                return Err(alloc::format!("c_P[{i}] = {:e} < 0", self.c_p[i]));
            }
            if self.rho_s[i] < -1e-12 * s_scale {
                return Err(alloc::format!("rho_S[{i}] = {:e} < 0", self.rho_s[i]));
            }
            if self.rho_e[i] < -e_tol || self.rho_e[i] > params.rho_e_th + e_tol {
                return Err(alloc::format!(
                    "rho_E[{i}] = {:e} outside [0, rho_E,th]",
                    self.rho_e[i]
                ));
            }
        }
        Ok(())
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// The seven element blocks, row-major `n x n` (vector `r` of length `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub nodes: Vec<usize>,
    /// `int N N^T`
    pub m: Vec<f64>,
    /// `int D_P grad N . grad N^T`
    pub l: Vec<f64>,
    /// `int alpha rho_S N N^T`
    pub p: Vec<f64>,
    /// `int (beta rho_S / rho_E,th + gamma c_P) N N^T`
    pub t: Vec<f64>,
    /// `int chi c_P g (grad N . grad rho_E) N^T` with `g = 1 - rho_E / rho_E,th`
    pub k: Vec<f64>,
    /// `int kappa c_P g N N^T`
    pub q: Vec<f64>,
    /// `int beta rho_S N`
    pub r: Vec<f64>,
}

/// Element blocks on the configuration `current` (reference if `None`),
/// with coefficients interpolated from `state` at each quadrature point.
pub fn element_matrices(
    mesh: &Mesh,
    element: usize,
    state: &FieldState,
    params: &TransportParams,
    current: Option<&[[f64; 2]]>,
) -> Result<ElementMatrices> {
    let nodes: Vec<usize> = mesh.elements[element].nodes().to_vec();
    let nn = nodes.len();
    let gather = |f: &[f64]| -> [f64; 4] {
        let mut out = [0.0; 4];
        for (a, &v) in nodes.iter().enumerate() {
            out[a] = f[v];
        }
        out
    };
    let c_e = gather(&state.c_p);
    let re_e = gather(&state.rho_e);
    let rs_e = gather(&state.rho_s);
    let mut em = ElementMatrices {
        nodes: nodes.clone(),
        m: vec![0.0; nn * nn],
        l: vec![0.0; nn * nn],
        p: vec![0.0; nn * nn],
        t: vec![0.0; nn * nn],
        k: vec![0.0; nn * nn],
        q: vec![0.0; nn * nn],
        r: vec![0.0; nn],
    };
    for qp in mesh.quadrature(element).points {
        let s = mesh.shape_eval(element, qp, current)?;
        let c = s.interpolate(&c_e);
        let re = s.interpolate(&re_e);
        let rs = s.interpolate(&rs_e);
        let grad_re = s.gradient(&re_e);
        let g = params.degradation(re);
        let dv = s.dv;
        let uptake = params.alpha * rs;
        let ecm_loss = params.beta * rs / params.rho_e_th + params.gamma * c;
        let chemo = params.chi * c * g;
        let prolif = params.kappa * c * g;
        for a in 0..nn {
            let na = s.n[a];
            let ga = s.dn_dx[a];
            em.r[a] += params.beta * rs * na * dv;
            let ga_dot_re = ga[0] * grad_re[0] + ga[1] * grad_re[1];
            for b in 0..nn {
                let nb = s.n[b];
                let gb = s.dn_dx[b];
                let nn_dv = na * nb * dv;
                let idx = a * nn + b;
                em.m[idx] += nn_dv;
                em.l[idx] += params.d_p * (ga[0] * gb[0] + ga[1] * gb[1]) * dv;
                em.p[idx] += uptake * nn_dv;
                em.t[idx] += ecm_loss * nn_dv;
                em.k[idx] += chemo * ga_dot_re * nb * dv;
                em.q[idx] += prolif * nn_dv;
            }
        }
    }
    Ok(em)
}

/// Global transport operators assembled at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportOperators {
    pub mass: CsrMatrix,
    pub diffusion: CsrMatrix,
    pub uptake: CsrMatrix,
    pub ecm_loss: CsrMatrix,
    pub chemotaxis: CsrMatrix,
    pub proliferation: CsrMatrix,
    pub ecm_source: Vec<f64>,
}

impl TransportOperators {
    pub fn assemble(
        mesh: &Mesh,
        state: &FieldState,
        params: &TransportParams,
        current: Option<&[[f64; 2]]>,
    ) -> Result<Self> {
        let n = mesh.node_count();
        let blocks = map_indexed(mesh.element_count(), |e| {
            element_matrices(mesh, e, state, params, current)
        })?;
        let mut asm: [Assembler; 6] = core::array::from_fn(|_| Assembler::new(n));
        let mut src = Assembler::new(n);
        for b in &blocks {
            for (a, m) in asm.iter_mut().zip([&b.m, &b.l, &b.p, &b.t, &b.k, &b.q]) {
                a.add_matrix(&b.nodes, m)?;
            }
            src.add_vector(&b.nodes, &b.r)?;
        }
        let [m, l, p, t, k, q] = asm.map(Assembler::finish_matrix);
        Ok(TransportOperators {
            mass: m,
            diffusion: l,
            uptake: p,
            ecm_loss: t,
            chemotaxis: k,
            proliferation: q,
            ecm_source: src.finish_vector(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stabilization {
    None,
    #[default]
    Fct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EcmMass {
    /// Row-sum lumped mass and decay matrix: a nodewise update that keeps
    /// `0 <= rho_E <= rho_E,th`.
    #[default]
    Lumped,
    Consistent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    pub stabilization: Stabilization,
    pub fct: FctOptions,
    /// Apply flux correction to the PDGF diffusion update as well as SMC.
    pub fct_pdgf: bool,
    pub ecm_mass: EcmMass,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            stabilization: Stabilization::Fct,
            fct: FctOptions::default(),
            fct_pdgf: true,
            ecm_mass: EcmMass::Lumped,
        }
    }
}

/// Constant normal influx on tagged boundary edges (amount per area per
/// day); positive values enter the wall.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryInflux {
    pub tag: String,
    pub pdgf: f64,
    pub smc: f64,
}

/// `int_Gamma q N da` for every edge tagged `tag`, on `current` coordinates.
pub fn boundary_load(mesh: &Mesh, tag: &str, q: f64, current: Option<&[[f64; 2]]>) -> Vec<f64> {
    let coords = current.unwrap_or(&mesh.coords);
    let mut out = vec![0.0; mesh.node_count()];
    // two-point Gauss on each edge
    const G: f64 = 0.577_350_269_189_625_8;
    for b in mesh.boundary.iter().filter(|b| b.tag == tag) {
        let el = &mesh.elements[b.element];
        let (i, j) = el.kind.edge_nodes(b.local_edge);
        let (vi, vj) = (el.nodes()[i], el.nodes()[j]);
        let (xi, xj) = (coords[vi], coords[vj]);
        let (dx, dy) = (xj[0] - xi[0], xj[1] - xi[1]);
        let len = crate::math::sqrt(dx * dx + dy * dy);
        for s in [-G, G] {
            let (ni, nj) = (0.5 * (1.0 - s), 0.5 * (1.0 + s));
            let mut w = 0.5 * len;
            if mesh.mode == crate::mesh::Mode::Axisymmetric {
                w *= 2.0 * core::f64::consts::PI * (ni * xi[0] + nj * xj[0]);
            }
            out[vi] += q * ni * w;
            out[vj] += q * nj * w;
        }
    }
    out
}

/// Zeroes negative values above `-1e-12 * scale`; anything below is an
/// error, because flux correction should never produce it.
pub(crate) fn clip_round_off(field: &mut [f64], name: &'static str, scale: f64) -> Result<()> {
    let tol = 1e-12 * scale;
    for (i, v) in field.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -tol {
                return Err(Error::NegativeValue {
                    field: name,
                    node: i,
                    value: *v,
                });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn stabilized_solve(
    ops: &TransportOperators,
    op: &CsrMatrix,
    u_n: &[f64],
    source: Option<&[f64]>,
    dt: f64,
    use_fct: bool,
    fct: FctOptions,
    name: &'static str,
) -> Result<Vec<f64>> {
    if use_fct {
        let mut u = fct_step(&ops.mass, op, u_n, source, dt, fct)?.solution;
        let scale = max_abs(u_n).max(max_abs(&u));
        clip_round_off(&mut u, name, scale)?;
        Ok(u)
    } else {
        let lhs = ops.mass.linear_combination(1.0, op, dt)?;
        let mut rhs = ops.mass.mul_vec(u_n);
        if let Some(s) = source {
            for (r, si) in rhs.iter_mut().zip(s) {
                *r += dt * si;
            }
        }
        solve_direct(&lhs, &rhs)
    }
}

/// PDGF update `[M + dt L + dt P] c^{n+1} = M c^n (+ dt boundary influx)`.
pub fn step_pdgf(
    ops: &TransportOperators,
    state_n: &FieldState,
    dt: f64,
    options: &TransportOptions,
    influx: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_dt(dt)?;
    let op = ops.diffusion.linear_combination(1.0, &ops.uptake, 1.0)?;
    let use_fct = options.stabilization == Stabilization::Fct && options.fct_pdgf;
    stabilized_solve(
        ops,
        &op,
        &state_n.c_p,
        influx,
        dt,
        use_fct,
        options.fct,
        "c_P",
    )
}

/// ECM update `[M + dt T] rho_E^{n+1} = M rho_E^n + dt R`.
pub fn step_ecm(
    ops: &TransportOperators,
    state_n: &FieldState,
    dt: f64,
    options: &TransportOptions,
) -> Result<Vec<f64>> {
    check_dt(dt)?;
    match options.ecm_mass {
        EcmMass::Lumped => {
            let m = ops.mass.row_sums();
            let t = ops.ecm_loss.row_sums();
            Ok((0..m.len())
                .map(|i| (m[i] * state_n.rho_e[i] + dt * ops.ecm_source[i]) / (m[i] + dt * t[i]))
                .collect())
        }
        EcmMass::Consistent => {
            let lhs = ops.mass.linear_combination(1.0, &ops.ecm_loss, dt)?;
            let mut rhs = ops.mass.mul_vec(&state_n.rho_e);
            for (r, s) in rhs.iter_mut().zip(&ops.ecm_source) {
                *r += dt * s;
            }
            solve_direct(&lhs, &rhs)
        }
    }
}

/// SMC update `[M + dt K - dt Q] rho_S^{n+1} = M rho_S^n (+ dt influx)`.
pub fn step_smc(
    ops: &TransportOperators,
    state_n: &FieldState,
    dt: f64,
    options: &TransportOptions,
    influx: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_dt(dt)?;
    let op = ops
        .chemotaxis
        .linear_combination(1.0, &ops.proliferation, -1.0)?;
    let use_fct = options.stabilization == Stabilization::Fct;
    stabilized_solve(
        ops,
        &op,
        &state_n.rho_s,
        influx,
        dt,
        use_fct,
        options.fct,
        "rho_S",
    )
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "dt",
            reason: alloc::format!("time step must be positive, got {dt:e}"),
        })
    }
}

/// One transport step on `current` coordinates: assemble with step-`n`
/// coefficients, then update PDGF, ECM and SMC in that order.
pub fn transport_step(
    mesh: &Mesh,
    current: Option<&[[f64; 2]]>,
    state_n: &FieldState,
    dt: f64,
    params: &TransportParams,
    options: &TransportOptions,
    influx: &[BoundaryInflux],
) -> Result<FieldState> {
    let ops = TransportOperators::assemble(mesh, state_n, params, current)?;
    let (pdgf_in, smc_in) = influx_loads(mesh, current, influx);
    let c_p = step_pdgf(&ops, state_n, dt, options, pdgf_in.as_deref())?;
    let rho_e = step_ecm(&ops, state_n, dt, options)?;
    let rho_s = step_smc(&ops, state_n, dt, options, smc_in.as_deref())?;
    Ok(FieldState {
        c_p,
        rho_e,
        rho_s,
        time: state_n.time + dt,
    })
}

fn influx_loads(
    mesh: &Mesh,
    current: Option<&[[f64; 2]]>,
    influx: &[BoundaryInflux],
) -> (Option<Vec<f64>>, Option<Vec<f64>>) {
    let mut pdgf: Option<Vec<f64>> = None;
    let mut smc: Option<Vec<f64>> = None;
    for b in influx {
        for (target, q) in [(&mut pdgf, b.pdgf), (&mut smc, b.smc)] {
            if q != 0.0 {
                let load = boundary_load(mesh, &b.tag, q, current);
                let acc = target.get_or_insert_with(|| vec![0.0; mesh.node_count()]);
                for (a, l) in acc.iter_mut().zip(load) {
                    *a += l;
                }
            }
        }
    }
    (pdgf, smc)
}

/// `int phi dv` of a nodal field.
pub fn integrate(mesh: &Mesh, field: &[f64], current: Option<&[[f64; 2]]>) -> Result<f64> {
    let mut total = 0.0;
    for e in 0..mesh.element_count() {
        let nodes = mesh.elements[e].nodes();
        let mut local = [0.0; 4];
        for (a, &v) in nodes.iter().enumerate() {
            local[a] = field[v];
        }
        for qp in mesh.quadrature(e).points {
            let s = mesh.shape_eval(e, qp, current)?;
            total += s.interpolate(&local) * s.dv;
        }
    }
    Ok(total)
}
