//! Staggered transport/mechanics driver.
//!
//! One step: transport on the current configuration, SMC density to the
//! Gauss points, Newton solve with the growth stretch following the current
//! `J`, pushback `phi* = (J_prev / J) phi` at the Gauss points, extrapolation
//! back to the nodes, coordinate update and commit of the growth history.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mechanics::{newton_solve, GrowthDrive, GrowthState, MechanicsProblem};
use crate::mesh::{reference_shape, Mesh};
use crate::transport::{
    transport_step, BoundaryInflux, FieldState, TransportOptions, TransportParams,
};

/// Full state of the coupled problem at an accepted time level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub fields: FieldState,
    /// One entry per Gauss point, in [`Mesh::gauss_layout`] order.
    pub growth: Vec<GrowthState>,
    /// Interleaved nodal displacements `(u_0, u_1)`.
    pub displacement: Vec<f64>,
    /// Reference coordinates plus displacements.
    pub current: Vec<[f64; 2]>,
    pub step: usize,
    pub time: f64,
}

impl CoupledState {
    /// Undeformed state with no growth history.
    pub fn initial(mesh: &Mesh, fields: FieldState) -> Result<Self> {
        if fields.len() != mesh.node_count() {
            return Err(Error::DimensionMismatch {
                expected: mesh.node_count(),
                found: fields.len(),
            });
        }
        let time = fields.time;
        Ok(CoupledState {
            fields,
            growth: vec![GrowthState::default(); mesh.gauss_layout().total()],
            displacement: vec![0.0; 2 * mesh.node_count()],
            current: mesh.coords.clone(),
            step: 0,
            time,
        })
    }

    /// Element averages of the growth stretch and of `J`.
    pub fn element_growth(&self, mesh: &Mesh) -> (Vec<f64>, Vec<f64>) {
        let layout = mesh.gauss_layout();
        let mut theta = Vec::with_capacity(mesh.element_count());
        let mut j = Vec::with_capacity(mesh.element_count());
        for e in 0..mesh.element_count() {
            let gp = &self.growth[layout.range(e)];
            let n = gp.len() as f64;
            theta.push(gp.iter().map(|g| g.theta).sum::<f64>() / n);
            j.push(gp.iter().map(|g| g.j_prev).sum::<f64>() / n);
        }
        (theta, j)
    }
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub dt: f64,
    pub newton_iterations: usize,
    /// Nodal values moved back into range after extrapolation.
    pub clamped: usize,
    /// Number of halvings needed before the step was accepted.
    pub halvings: usize,
}

impl StepReport {
    fn accumulate(&mut self, other: &StepReport) {
        self.dt += other.dt;
        self.newton_iterations += other.newton_iterations;
        self.clamped += other.clamped;
        self.halvings = self.halvings.max(other.halvings);
    }
}

/// Everything that stays fixed during a run.
#[derive(Debug, Clone)]
pub struct CoupledModel<'a> {
    pub mesh: &'a Mesh,
    pub transport: TransportParams,
    pub transport_options: TransportOptions,
    pub influx: Vec<BoundaryInflux>,
    /// `None` runs transport on the fixed reference configuration.
    pub mechanics: Option<MechanicsProblem<'a>>,
    pub dt_min: f64,
}

impl<'a> CoupledModel<'a> {
    pub fn transport_only(mesh: &'a Mesh, transport: TransportParams) -> Self {
        CoupledModel {
            mesh,
            transport,
            transport_options: TransportOptions::default(),
            influx: Vec::new(),
            mechanics: None,
            dt_min: 0.0,
        }
    }

    /// One staggered step of size `dt` without retries.
    pub fn staggered_step(
        &self,
        state: &CoupledState,
        dt: f64,
    ) -> Result<(CoupledState, StepReport)> {
        let mesh = self.mesh;
        let fields = transport_step(
            mesh,
            Some(&state.current),
            &state.fields,
            dt,
            &self.transport,
            &self.transport_options,
            &self.influx,
        )?;
        let time = state.time + dt;
        let Some(problem) = &self.mechanics else {
            return Ok((
                CoupledState {
                    fields,
                    growth: state.growth.clone(),
                    displacement: state.displacement.clone(),
                    current: state.current.clone(),
                    step: state.step + 1,
                    time,
                },
                StepReport {
                    dt,
                    ..StepReport::default()
                },
            ));
        };
        let rho_gp = interpolate_to_gauss(mesh, &fields.rho_s);
        let outcome = newton_solve(
            problem,
            &state.growth,
            GrowthDrive::Density(&rho_gp),
            &state.displacement,
        )?;
        let scale: Vec<f64> = state
            .growth
            .iter()
            .zip(&outcome.gauss)
            .map(|(g, r)| g.j_prev / r.j)
            .collect();
        let current: Vec<[f64; 2]> = mesh
            .coords
            .iter()
            .enumerate()
            .map(|(v, x)| {
                [
                    x[0] + outcome.displacement[2 * v],
                    x[1] + outcome.displacement[2 * v + 1],
                ]
            })
            .collect();
        let mut clamped = 0;
        let mut push = |nodal: &[f64], upper: f64| -> Result<Vec<f64>> {
            let gp: Vec<f64> = interpolate_to_gauss(mesh, nodal)
                .iter()
                .zip(&scale)
                .map(|(v, s)| v * s)
                .collect();
            let mut out = gp_to_node_extrapolate(mesh, &gp, Some(&current))?;
            for v in out.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                    clamped += 1;
                } else if *v > upper {
                    *v = upper;
                    clamped += 1;
                }
            }
            Ok(out)
        };
        let fields = FieldState {
            c_p: push(&fields.c_p, f64::INFINITY)?,
            rho_e: push(&fields.rho_e, self.transport.rho_e_th)?,
            rho_s: push(&fields.rho_s, f64::INFINITY)?,
            time,
        };
        let growth = state
            .growth
            .iter()
            .zip(&outcome.gauss)
            .map(|(_, r)| GrowthState {
                theta: r.theta,
                theta_prev: r.theta,
                j_prev: r.j,
            })
            .collect();
        Ok((
            CoupledState {
                fields,
                growth,
                displacement: outcome.displacement,
                current,
                step: state.step + 1,
                time,
            },
            StepReport {
                dt,
                newton_iterations: outcome.iterations,
                clamped,
                halvings: 0,
            },
        ))
    }

    /// Advances by `dt`, splitting into halves on a rejected step until the
    /// sub-step would fall below `dt_min`.
    pub fn advance(&self, state: &CoupledState, dt: f64) -> Result<(CoupledState, StepReport)> {
        match self.staggered_step(state, dt) {
            Ok(r) => Ok(r),
            Err(e) if e.is_step_rejection() => {
                let half = 0.5 * dt;
                if half < self.dt_min || half <= 0.0 {
                    return Err(Error::StepTooSmall {
                        dt: half,
                        dt_min: self.dt_min,
                        cause: Box::new(e),
                    });
                }
                let (mid, r1) = self.advance(state, half)?;
                let (mut end, r2) = self.advance(&mid, half)?;
                end.step = state.step + 1;
                Ok((
                    end,
                    StepReport {
                        dt,
                        newton_iterations: r1.newton_iterations + r2.newton_iterations,
                        clamped: r1.clamped + r2.clamped,
                        halvings: 1 + r1.halvings.max(r2.halvings),
                    },
                ))
            }
            Err(e) => Err(e),
        }
    }

    /// Steps from `initial.time` to `t_end` with step `dt` (the last step is
    /// shortened to land on `t_end`). `output` receives the initial state and
    /// every state at or past each multiple of `cadence`, together with the
    /// reports of all steps since the previous output summed (`dt` is the
    /// elapsed time, `halvings` the largest count). Returns the final state
    /// and the same summary over the whole run.
    pub fn run<F>(
        &self,
        initial: CoupledState,
        t_end: f64,
        dt: f64,
        cadence: f64,
        mut output: F,
    ) -> Result<(CoupledState, StepReport)>
    where
        F: FnMut(&CoupledState, &StepReport) -> Result<()>,
    {
        if !(dt > 0.0) || !(cadence > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: alloc::format!("dt and cadence must be positive, got {dt} and {cadence}"),
            });
        }
        let t0 = initial.time;
        let mut state = initial;
        output(&state, &StepReport::default())?;
        let eps = 1e-9 * dt;
        let mut next_output = 1usize;
        let mut since = StepReport::default();
        let mut total = StepReport::default();
        while state.time < t_end - eps {
            let h = dt.min(t_end - state.time);
            let (next, report) = self.advance(&state, h)?;
            state = next;
            since.accumulate(&report);
            total.accumulate(&report);
            if state.time >= t0 + next_output as f64 * cadence - eps {
                output(&state, &since)?;
                since = StepReport::default();
                while state.time >= t0 + next_output as f64 * cadence - eps {
                    next_output += 1;
                }
            }
        }
        Ok((state, total))
    }
}

/// Values of a nodal field at every Gauss point.
pub fn interpolate_to_gauss(mesh: &Mesh, nodal: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(mesh.gauss_layout().total());
    for (e, el) in mesh.elements.iter().enumerate() {
        let nodes = el.nodes();
        for qp in mesh.quadrature(e).points {
            let (n, _) = reference_shape(el.kind, qp.xi);
            out.push(
                nodes
                    .iter()
                    .enumerate()
                    .map(|(a, &v)| n[a] * nodal[v])
                    .sum(),
            );
        }
    }
    out
}

/// Inverse of the square matrix `a` (row-major `n x n`) by Gauss-Jordan
/// elimination with partial pivoting.
fn invert_small(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| m[x * n + k].abs().total_cmp(&m[y * n + k].abs()))?;
        if m[p * n + k] == 0.0 {
            return None;
        }
        for j in 0..n {
            m.swap(k * n + j, p * n + j);
            inv.swap(k * n + j, p * n + j);
        }
        let d = m[k * n + k];
        for j in 0..n {
            m[k * n + j] /= d;
            inv[k * n + j] /= d;
        }
        for i in 0..n {
            if i != k {
                let f = m[i * n + k];
                for j in 0..n {
                    m[i * n + j] -= f * m[k * n + j];
                    inv[i * n + j] -= f * inv[k * n + j];
                }
            }
        }
    }
    Some(inv)
}

/// Extrapolates Gauss-point values to element corners by inverting the
/// shape-function interpolation (a single point gives a constant), then
/// averages at shared nodes weighted by element volume on `current`.
pub fn gp_to_node_extrapolate(
    mesh: &Mesh,
    gp_values: &[f64],
    current: Option<&[[f64; 2]]>,
) -> Result<Vec<f64>> {
    let layout = mesh.gauss_layout();
    if gp_values.len() != layout.total() {
        return Err(Error::DimensionMismatch {
            expected: layout.total(),
            found: gp_values.len(),
        });
    }
    let mut sum = vec![0.0; mesh.node_count()];
    let mut weight = vec![0.0; mesh.node_count()];
    for (e, el) in mesh.elements.iter().enumerate() {
        let nodes = el.nodes();
        let rule = mesh.quadrature(e);
        let values = &gp_values[layout.range(e)];
        let w = mesh.element_measure(e, current)?;
        let corner: Vec<f64> = if rule.len() == nodes.len() {
            let nn = nodes.len();
            let mut a = vec![0.0; nn * nn];
            for (q, qp) in rule.points.iter().enumerate() {
                let (n, _) = reference_shape(el.kind, qp.xi);
                a[q * nn..(q + 1) * nn].copy_from_slice(&n[..nn]);
            }
            let inv = invert_small(nn, &a).ok_or_else(|| {
                Error::InvalidMesh(alloc::format!("element {e}: singular extrapolation"))
            })?;
            (0..nn)
                .map(|i| (0..nn).map(|q| inv[i * nn + q] * values[q]).sum())
                .collect()
        } else {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            vec![mean; nodes.len()]
        };
        for (&v, c) in nodes.iter().zip(corner) {
            sum[v] += w * c;
            weight[v] += w;
        }
    }
    Ok(sum
        .into_iter()
        .zip(weight)
        .map(|(s, w)| if w > 0.0 { s / w } else { 0.0 })
        .collect())
}
