//! Mesh, initial fields and model assembled from a configuration.

use restenosim_core::coupling::{CoupledModel, CoupledState};
use restenosim_core::mechanics::{GrowthLaw, MechanicsProblem, Traction};
use restenosim_core::mesh::{reference_shape, structured_rectangle, Mesh, RectangleSpec};
use restenosim_core::transport::{BoundaryInflux, FieldState};

use crate::config::SimulationConfig;
use crate::error::Result;
use crate::mesh_io::load_mesh;

pub fn build_mesh(cfg: &SimulationConfig) -> Result<Mesh> {
    let mut mesh = match &cfg.mesh.file {
        Some(path) => load_mesh(path)?,
        None => structured_rectangle(&RectangleSpec {
            length: cfg.mesh.length,
            thickness: cfg.mesh.thickness,
            nx: cfg.mesh.nx,
            ny: cfg.mesh.ny,
            mode: cfg.mesh.mode,
            inner_offset: cfg.inner_offset(),
        })?,
    };
    mesh.tri_rule = cfg.mesh.triangle_rule;
    Ok(mesh)
}

/// Gaussian PDGF peaks over uniform healthy ECM and SMC.
pub fn build_initial_state(cfg: &SimulationConfig, mesh: &Mesh) -> FieldState {
    let peaks = cfg.peaks();
    let (lo, hi) = mesh.bounding_box();
    for p in &peaks {
        let c = p.center;
        if c[0] < lo[0] || c[0] > hi[0] || c[1] < lo[1] || c[1] > hi[1] {
            log::warn!(
                "PDGF peak at ({}, {}) lies outside the mesh bounding box",
                c[0],
                c[1]
            );
        }
    }
    let mut fields = FieldState::uniform(
        mesh.node_count(),
        0.0,
        cfg.initial.rho_e0,
        cfg.initial.rho_s0,
    );
    for (c, x) in fields.c_p.iter_mut().zip(&mesh.coords) {
        for p in &peaks {
            let d2 = (x[0] - p.center[0]).powi(2) + (x[1] - p.center[1]).powi(2);
            *c += p.amplitude * (-d2 / (2.0 * p.sigma * p.sigma)).exp();
        }
    }
    fields
}

/// Transport-only or fully coupled model for `mesh`.
pub fn build_model<'a>(
    cfg: &SimulationConfig,
    mesh: &'a Mesh,
    coupled: bool,
) -> Result<CoupledModel<'a>> {
    cfg.transport.validate()?;
    let mut model = CoupledModel::transport_only(mesh, cfg.transport);
    model.transport_options = cfg.transport_options;
    model.dt_min = cfg.time.dt_min;
    model.influx = cfg
        .boundary
        .influx
        .iter()
        .map(|b| BoundaryInflux {
            tag: b.tag.clone(),
            pdgf: b.pdgf,
            smc: b.smc,
        })
        .collect();
    if coupled {
        cfg.material.validate()?;
        let growth = GrowthLaw {
            rho_s_h: cfg.transport.rho_s_h,
            dimension: cfg.growth_dimension(),
        };
        growth.validate()?;
        let mut problem = MechanicsProblem::new(mesh, cfg.material, growth);
        for tag in &cfg.boundary.fixed {
            problem.fix_boundary(tag);
        }
        problem.tractions = cfg
            .boundary
            .tractions
            .iter()
            .map(|t| Traction {
                tag: t.tag.clone(),
                value: t.value,
            })
            .collect();
        problem.options = cfg.newton;
        model.mechanics = Some(problem);
    }
    Ok(model)
}

pub fn initial_state(cfg: &SimulationConfig, mesh: &Mesh) -> Result<CoupledState> {
    Ok(CoupledState::initial(mesh, build_initial_state(cfg, mesh))?)
}

/// Value of a nodal field at a reference-configuration point, or `None`
/// outside the mesh.
pub fn sample(mesh: &Mesh, field: &[f64], p: [f64; 2]) -> Option<f64> {
    let (e, xi) = mesh.locate(p)?;
    let el = &mesh.elements[e];
    // the inverse map is inexact; a point on a node takes the nodal value
    if let Some(&v) = el.nodes().iter().find(|&&v| mesh.coords[v] == p) {
        return Some(field[v]);
    }
    let (n, _) = reference_shape(el.kind, xi);
    Some(
        el.nodes()
            .iter()
            .enumerate()
            .map(|(a, &v)| n[a] * field[v])
            .sum(),
    )
}

/// Index (in Gauss layout order) of the Gauss point nearest to `p` within
/// the element containing it.
pub fn nearest_gauss_point(mesh: &Mesh, p: [f64; 2]) -> Option<usize> {
    let (e, _) = mesh.locate(p)?;
    let start = mesh.gauss_layout().range(e).start;
    let mut best = (f64::INFINITY, start);
    for (k, qp) in mesh.quadrature(e).points.iter().enumerate() {
        let x = mesh.shape_eval(e, qp, None).ok()?.x;
        let d = (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2);
        if d < best.0 {
            best = (d, start + k);
        }
    }
    Some(best.1)
}
