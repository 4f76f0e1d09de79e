//! Algebraic flux-corrected transport.
//!
//! A transport update `(M + dt A) u = M u_n` is replaced by a bounded
//! low-order update `(M_L + dt (A + D)) u_L = M_L u_n`, where `M_L` is the
//! lumped mass and `D` the artificial diffusion that removes every positive
//! off-diagonal entry of `A`. The difference to the Galerkin (high-order)
//! solution is expressed as antisymmetric antidiffusive fluxes, which are
//! limited node by node with Zalesak's algorithm so that no new local
//! extrema appear.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::{solve_direct, CsrMatrix};

/// Artificial diffusion for the left-hand-side operator `a`.
///
/// Off-diagonal `d_ij = -max(0, a_ij, a_ji)`, diagonal `d_ii = -sum_j d_ij`,
/// so `D` is symmetric with zero row sums and `a + D` has no positive
/// off-diagonal entries.
pub fn artificial_diffusion(a: &CsrMatrix) -> CsrMatrix {
    let at = a.transpose();
    // union pattern of a and a^T carries every pair that needs diffusion
    let pattern = a
        .linear_combination(1.0, &at, 1.0)
        .expect("transpose has the same dimension");
    let n = a.dim();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(pattern.nnz());
    let mut vals = Vec::with_capacity(pattern.nnz());
    row_ptr.push(0);
    for i in 0..n {
        let mut diag_pos = None;
        let mut off_sum = 0.0;
        for &j in pattern.row_cols(i) {
            if i == j {
                diag_pos = Some(cols.len());
                cols.push(j);
                vals.push(0.0);
                continue;
            }
            let d = -(a.get(i, j).max(a.get(j, i)).max(0.0));
            off_sum += d;
            cols.push(j);
            vals.push(d);
        }
        match diag_pos {
            Some(k) => vals[k] = -off_sum,
            None => {
                // insert the diagonal in sorted position
                let start = row_ptr[i];
                let pos = start + cols[start..].partition_point(|&c| c < i);
                cols.insert(pos, i);
                vals.insert(pos, -off_sum);
            }
        }
        row_ptr.push(cols.len());
    }
    CsrMatrix::from_parts(n, row_ptr, cols, vals)
}

/// Antidiffusive fluxes on the edges of the operator graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxGraph {
    /// `(i, j, f_ij)` with `i < j`; the flux into `i` is `f_ij` and into `j`
    /// is `f_ji = -f_ij`. Units: amount per time.
    pub edges: Vec<(usize, usize, f64)>,
    pub lumped_mass: Vec<f64>,
}

impl FluxGraph {
    /// Graph with every off-diagonal pair of `pattern` and zero fluxes.
    pub fn from_pattern(pattern: &CsrMatrix, lumped_mass: Vec<f64>) -> Self {
        let mut edges = Vec::new();
        for i in 0..pattern.dim() {
            for &j in pattern.row_cols(i) {
                if j > i {
                    edges.push((i, j, 0.0));
                }
            }
        }
        FluxGraph { edges, lumped_mass }
    }

    /// Solution obtained by accepting every flux unlimited.
    pub fn unlimited(&self, low_order: &[f64], dt: f64) -> Vec<f64> {
        let mut net = vec![0.0; low_order.len()];
        for &(i, j, f) in &self.edges {
            net[i] += f;
            net[j] -= f;
        }
        low_order
            .iter()
            .zip(&net)
            .zip(&self.lumped_mass)
            .map(|((u, s), m)| u + dt * s / m)
            .collect()
    }
}

/// Per-node quantities of one limiting pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LimiterBounds {
    pub u_min: Vec<f64>,
    pub u_max: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
    pub r_minus: Vec<f64>,
}

/// Zalesak limiting of `graph`'s fluxes around the bounded `low_order`
/// solution.
///
/// Bounds are taken over each node's graph neighbours including itself.
/// The corrected value is clamped into `[u_min, u_max]` when it misses the
/// interval by round-off only; a larger miss is a [`Error::BoundViolation`].
pub fn zalesak_limit(
    low_order: &[f64],
    graph: &FluxGraph,
    dt: f64,
) -> Result<(Vec<f64>, LimiterBounds)> {
    let n = low_order.len();
    let mut u_min = low_order.to_vec();
    let mut u_max = low_order.to_vec();
    for &(i, j, _) in &graph.edges {
        u_max[i] = u_max[i].max(low_order[j]);
        u_min[i] = u_min[i].min(low_order[j]);
        u_max[j] = u_max[j].max(low_order[i]);
        u_min[j] = u_min[j].min(low_order[i]);
    }
    let mut p_plus = vec![0.0; n];
    let mut p_minus = vec![0.0; n];
    for &(i, j, f) in &graph.edges {
        if f > 0.0 {
            p_plus[i] += f;
            p_minus[j] -= f;
        } else {
            p_minus[i] += f;
            p_plus[j] -= f;
        }
    }
    let mut q_plus = vec![0.0; n];
    let mut q_minus = vec![0.0; n];
    let mut r_plus = vec![1.0; n];
    let mut r_minus = vec![1.0; n];
    for i in 0..n {
        let m = graph.lumped_mass[i];
        q_plus[i] = m * (u_max[i] - low_order[i]) / dt;
        q_minus[i] = m * (u_min[i] - low_order[i]) / dt;
        if p_plus[i] > 0.0 {
            r_plus[i] = (q_plus[i] / p_plus[i]).min(1.0);
        }
        if p_minus[i] < 0.0 {
            r_minus[i] = (q_minus[i] / p_minus[i]).min(1.0);
        }
    }
    let mut net = vec![0.0; n];
    for &(i, j, f) in &graph.edges {
        let alpha = if f > 0.0 {
            r_plus[i].min(r_minus[j])
        } else {
            r_minus[i].min(r_plus[j])
        };
        net[i] += alpha * f;
        net[j] -= alpha * f;
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let u = low_order[i] + dt * net[i] / graph.lumped_mass[i];
        let scale = u_max[i].abs().max(u_min[i].abs());
        let tol = 1e-12 * scale;
        if u > u_max[i] + tol || u < u_min[i] - tol || !u.is_finite() {
            return Err(Error::BoundViolation {
                node: i,
                value: u,
                min: u_min[i],
                max: u_max[i],
            });
        }
        out.push(u.clamp(u_min[i], u_max[i]));
    }
    Ok((
        out,
        LimiterBounds {
            u_min,
            u_max,
            q_plus,
            q_minus,
            r_plus,
            r_minus,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FctOptions {
    /// Cancel raw fluxes that point down the low-order gradient.
    pub prelimit: bool,
}

impl Default for FctOptions {
    fn default() -> Self {
        FctOptions { prelimit: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FctOutcome {
    pub solution: Vec<f64>,
    pub low_order: Vec<f64>,
    pub high_order: Vec<f64>,
    pub graph: FluxGraph,
}

/// One flux-corrected backward-Euler step of `(M + dt A) u = M u_n + dt s`.
///
/// Raw fluxes are `f_ij = [m_ij (du_ij - du_ij^n) + dt |d_ij| du_ij] / dt`
/// with `du_ij = u_H,i - u_H,j` from the Galerkin solution `u_H`.
pub fn fct_step(
    mass: &CsrMatrix,
    op: &CsrMatrix,
    u_n: &[f64],
    source: Option<&[f64]>,
    dt: f64,
    options: FctOptions,
) -> Result<FctOutcome> {
    let lumped = mass.row_sums();
    let high_lhs = mass.linear_combination(1.0, op, dt)?;
    let mut high_rhs = mass.mul_vec(u_n);
    let mut low_rhs: Vec<f64> = lumped.iter().zip(u_n).map(|(m, u)| m * u).collect();
    if let Some(s) = source {
        for ((h, l), si) in high_rhs.iter_mut().zip(low_rhs.iter_mut()).zip(s) {
            *h += dt * si;
            *l += dt * si;
        }
    }
    let high = solve_direct(&high_lhs, &high_rhs)?;

    let diffusion = artificial_diffusion(op);
    let low_op = op.linear_combination(1.0, &diffusion, 1.0)?;
    let low_lhs = CsrMatrix::from_diagonal(&lumped).linear_combination(1.0, &low_op, dt)?;
    let low = solve_direct(&low_lhs, &low_rhs)?;

    let pattern = mass.linear_combination(1.0, &diffusion, 1.0)?;
    let mut graph = FluxGraph::from_pattern(&pattern, lumped);
    for e in graph.edges.iter_mut() {
        let (i, j) = (e.0, e.1);
        let m_ij = mass.get(i, j);
        let d_ij = -diffusion.get(i, j);
        let du = high[i] - high[j];
        let du_n = u_n[i] - u_n[j];
        let mut f = (m_ij * (du - du_n) + dt * d_ij * du) / dt;
        if options.prelimit && f * (low[i] - low[j]) < 0.0 {
            f = 0.0;
        }
        e.2 = f;
    }
    let (solution, _) = zalesak_limit(&low, &graph, dt)?;
    Ok(FctOutcome {
        solution,
        low_order: low,
        high_order: high,
        graph,
    })
}
