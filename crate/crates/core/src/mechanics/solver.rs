//! Quasi-static equilibrium `int P : grad(du) dV = int T . du dA` solved by
//! Newton-Raphson on the reference configuration.
//!
//! Displacement dofs are interleaved, `2 * node + component`. In
//! axisymmetric mode the hoop stretch `1 + u_r / R` enters `F` as its
//! `(2, 2)` entry.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::growth::{GrowthLaw, GrowthState};
use super::material::{
    growth_gradient, material_tangent, pk1_stress, Kinematics, MaterialParams, StructureTensors,
};
use super::tensor::{self, Mat3};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Mode, ShapeEval};
use crate::numerics::{norm2, Assembler, ElementContribution, LinearSystem, SolverKind};
use crate::par::map_indexed;

/// Source of the growth stretch at each Gauss point.
#[derive(Debug, Clone, Copy)]
pub enum GrowthDrive<'a> {
    /// Prescribed stretch per Gauss point, independent of the deformation.
    Frozen(&'a [f64]),
    /// SMC density per Gauss point; the stretch follows the incremental law
    /// with the current `J`.
    Density(&'a [f64]),
}

/// Dead load per unit reference area on the edges carrying `tag`.
#[derive(Debug, Clone, PartialEq)]
pub struct Traction {
    pub tag: String,
    pub value: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iters: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iters: 25,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MechanicsProblem<'a> {
    pub mesh: &'a Mesh,
    pub material: MaterialParams,
    pub structure: StructureTensors,
    pub growth: GrowthLaw,
    /// Prescribed displacement per dof.
    pub dirichlet: Vec<(usize, f64)>,
    pub tractions: Vec<Traction>,
    pub options: NewtonOptions,
}

impl<'a> MechanicsProblem<'a> {
    /// Problem with fibres oriented for the mesh mode and no constraints.
    pub fn new(mesh: &'a Mesh, material: MaterialParams, growth: GrowthLaw) -> Self {
        MechanicsProblem {
            mesh,
            material,
            structure: StructureTensors::for_mode(mesh.mode, &material),
            growth,
            dirichlet: Vec::new(),
            tractions: Vec::new(),
            options: NewtonOptions::default(),
        }
    }

    /// Clamps both displacement components on every node of `tag`.
    pub fn fix_boundary(&mut self, tag: &str) {
        for v in self.mesh.nodes_with_tag(tag) {
            self.dirichlet.push((2 * v, 0.0));
            self.dirichlet.push((2 * v + 1, 0.0));
        }
    }

    pub fn dof_count(&self) -> usize {
        2 * self.mesh.node_count()
    }
}

/// Response at one Gauss point of a converged (or trial) displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussResponse {
    pub f: Mat3,
    pub j: f64,
    pub theta: f64,
    pub stress: Mat3,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub displacement: Vec<f64>,
    pub gauss: Vec<GaussResponse>,
    /// Number of residual evaluations.
    pub iterations: usize,
    /// Free-dof residual norm at every evaluation.
    pub residual_history: Vec<f64>,
}

impl NewtonOutcome {
    /// Successive ratios `r_{k+1} / r_k^2`; bounded ratios indicate
    /// quadratic convergence.
    pub fn convergence_ratios(&self) -> Vec<f64> {
        self.residual_history
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / (w[0] * w[0]))
            .collect()
    }
}

/// Deformation gradient at a Gauss point from nodal displacements.
pub fn deformation_gradient(mode: Mode, s: &ShapeEval, u_local: &[[f64; 2]]) -> Mat3 {
    let mut f = tensor::IDENTITY;
    for (a, u) in u_local.iter().enumerate().take(s.node_count) {
        for i in 0..2 {
            for jj in 0..2 {
                f[i][jj] += u[i] * s.dn_dx[a][jj];
            }
        }
    }
    if mode == Mode::Axisymmetric {
        let ur: f64 = (0..s.node_count).map(|a| s.n[a] * u_local[a][0]).sum();
        f[2][2] = 1.0 + ur / s.x[0];
    }
    f
}

/// Virtual deformation gradient of a unit displacement of node `a` in
/// direction `i`.
fn test_gradient(mode: Mode, s: &ShapeEval, a: usize, i: usize) -> Mat3 {
    let mut g = tensor::ZERO;
    g[i][0] = s.dn_dx[a][0];
    g[i][1] = s.dn_dx[a][1];
    if mode == Mode::Axisymmetric && i == 0 {
        g[2][2] = s.n[a] / s.x[0];
    }
    g
}

struct ElementResult {
    contribution: ElementContribution,
    gauss: Vec<GaussResponse>,
}

fn element_response(
    problem: &MechanicsProblem,
    e: usize,
    gp_start: usize,
    u: &[f64],
    states: &[GrowthState],
    drive: GrowthDrive,
    with_tangent: bool,
) -> Result<ElementResult> {
    let mesh = problem.mesh;
    let mode = mesh.mode;
    let nodes = mesh.elements[e].nodes();
    let nn = nodes.len();
    let mut u_local = [[0.0; 2]; 4];
    let mut dofs = Vec::with_capacity(2 * nn);
    for (a, &v) in nodes.iter().enumerate() {
        u_local[a] = [u[2 * v], u[2 * v + 1]];
        dofs.push(2 * v);
        dofs.push(2 * v + 1);
    }
    let nd = 2 * nn;
    let mut vector = vec![0.0; nd];
    let mut matrix = if with_tangent {
        Some(vec![0.0; nd * nd])
    } else {
        None
    };
    let rule = mesh.quadrature(e);
    let mut gauss = Vec::with_capacity(rule.len());
    for (q, qp) in rule.points.iter().enumerate() {
        let g = gp_start + q;
        let s = mesh.shape_eval(e, qp, None)?;
        let f = deformation_gradient(mode, &s, &u_local[..nn]);
        let j = tensor::det(&f);
        if !(j > 0.0) {
            return Err(Error::InvertedDeformation { det: j });
        }
        let (theta, dtheta_df) = match drive {
            GrowthDrive::Frozen(t) => (t[g], tensor::ZERO),
            GrowthDrive::Density(rho) => {
                let (theta, dtheta_dj) = problem.growth.evaluate(&states[g], j, rho[g])?;
                (theta, growth_gradient(&f, dtheta_dj)?)
            }
        };
        let kin = Kinematics::new(f, theta, problem.growth.dimension)?;
        let p = pk1_stress(&kin, &problem.structure, &problem.material)?;
        let tests: Vec<Mat3> = (0..nd)
            .map(|r| test_gradient(mode, &s, r / 2, r % 2))
            .collect();
        for (r, gr) in tests.iter().enumerate() {
            vector[r] += tensor::ddot(&p, gr) * s.dv;
        }
        if let Some(m) = matrix.as_mut() {
            let a4 = material_tangent(&kin, &problem.structure, &problem.material, &dtheta_df)?;
            for (c, gc) in tests.iter().enumerate() {
                let ag = tensor::contract(&a4, gc);
                for (r, gr) in tests.iter().enumerate() {
                    m[r * nd + c] += tensor::ddot(gr, &ag) * s.dv;
                }
            }
        }
        gauss.push(GaussResponse {
            f,
            j,
            theta,
            stress: p,
        });
    }
    Ok(ElementResult {
        contribution: ElementContribution {
            dofs,
            matrix,
            vector: Some(vector),
        },
        gauss,
    })
}

/// Assembled out-of-balance force `f_int - f_ext`, optionally with the
/// consistent tangent, and the Gauss-point responses.
pub fn assemble_residual(
    problem: &MechanicsProblem,
    u: &[f64],
    states: &[GrowthState],
    drive: GrowthDrive,
    with_tangent: bool,
) -> Result<(
    Vec<f64>,
    Option<crate::numerics::CsrMatrix>,
    Vec<GaussResponse>,
)> {
    let n = problem.dof_count();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.len(),
        });
    }
    let layout = problem.mesh.gauss_layout();
    let total = layout.total();
    let per_gp = match drive {
        GrowthDrive::Frozen(t) => t.len(),
        GrowthDrive::Density(r) => r.len(),
    };
    if per_gp != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: per_gp,
        });
    }
    if matches!(drive, GrowthDrive::Density(_)) && states.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: states.len(),
        });
    }
    let results = map_indexed(problem.mesh.element_count(), |e| {
        element_response(
            problem,
            e,
            layout.range(e).start,
            u,
            states,
            drive,
            with_tangent,
        )
    })?;
    let mut asm = Assembler::new(n);
    let mut gauss = Vec::with_capacity(total);
    for r in results {
        asm.add(&r.contribution)?;
        gauss.extend(r.gauss);
    }
    let mut residual = asm.finish_vector();
    let matrix = if with_tangent {
        Some(asm.finish_matrix())
    } else {
        None
    };
    for t in &problem.tractions {
        for (i, &value) in t.value.iter().enumerate() {
            if value == 0.0 {
                continue;
            }
            let load = crate::transport::boundary_load(problem.mesh, &t.tag, value, None);
            for (v, l) in load.into_iter().enumerate() {
                residual[2 * v + i] -= l;
            }
        }
    }
    Ok((residual, matrix, gauss))
}

/// Newton-Raphson equilibrium solve starting from `u0`.
///
/// Converged when the free-dof residual norm drops to
/// `max(abs_tol, rel_tol * initial)`.
pub fn newton_solve(
    problem: &MechanicsProblem,
    states: &[GrowthState],
    drive: GrowthDrive,
    u0: &[f64],
) -> Result<NewtonOutcome> {
    let n = problem.dof_count();
    let mut u = u0.to_vec();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.len(),
        });
    }
    let mut constrained = vec![false; n];
    for &(d, value) in &problem.dirichlet {
        if d >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d + 1,
            });
        }
        constrained[d] = true;
        u[d] = value;
    }
    let opts = problem.options;
    let mut history = Vec::new();
    let mut tol = opts.abs_tol;
    for it in 0..opts.max_iters.max(1) {
        let (mut r, k, gauss) = assemble_residual(problem, &u, states, drive, true)?;
        for (ri, &c) in r.iter_mut().zip(&constrained) {
            if c {
                *ri = 0.0;
            }
        }
        let norm = norm2(&r);
        if !norm.is_finite() {
            return Err(Error::NewtonDiverged {
                iterations: it + 1,
                residual: norm,
            });
        }
        history.push(norm);
        if it == 0 {
            tol = opts.abs_tol.max(opts.rel_tol * norm);
        }
        if norm <= tol {
            return Ok(NewtonOutcome {
                displacement: u,
                gauss,
                iterations: it + 1,
                residual_history: history,
            });
        }
        if it + 1 == opts.max_iters {
            break;
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut sys = LinearSystem::new(k.expect("tangent requested"), rhs)?;
        for (d, &c) in constrained.iter().enumerate() {
            if c {
                sys.constrain(d, 0.0);
            }
        }
        sys.apply_constraints(false);
        let du = sys.solve(SolverKind::Direct)?.x;
        for (ui, d) in u.iter_mut().zip(du) {
            *ui += d;
        }
    }
    Err(Error::NewtonDiverged {
        iterations: opts.max_iters,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}
