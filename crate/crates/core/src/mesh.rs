//! Geometry, linear shape functions and quadrature on 2D meshes of 3-node
//! triangles and 4-node quadrilaterals.
//!
//! Coordinates are `(x, y)` in plane mode and `(r, z)` in axisymmetric mode,
//! in millimetres. In axisymmetric mode every integration weight carries the
//! `2 pi r` factor, so integrals are revolved volumes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Plane,
    Axisymmetric,
}

impl Mode {
    /// Index of the coordinate running along the vessel axis.
    pub fn axial_axis(self) -> usize {
        match self {
            Mode::Plane => 0,
            Mode::Axisymmetric => 1,
        }
    }

    /// Index of the through-thickness (radial) coordinate.
    pub fn radial_axis(self) -> usize {
        1 - self.axial_axis()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Tri3,
    Quad4,
}

impl ElementKind {
    pub fn node_count(self) -> usize {
        match self {
            ElementKind::Tri3 => 3,
            ElementKind::Quad4 => 4,
        }
    }

    pub fn edge_count(self) -> usize {
        self.node_count()
    }

    /// Local node indices of edge `edge` (counter-clockwise).
    pub fn edge_nodes(self, edge: usize) -> (usize, usize) {
        let n = self.node_count();
        (edge, (edge + 1) % n)
    }

    /// Reference-element measure: 1/2 for the unit triangle, 4 for the
    /// bi-unit square.
    pub fn reference_measure(self) -> f64 {
        match self {
            ElementKind::Tri3 => 0.5,
            ElementKind::Quad4 => 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    pub kind: ElementKind,
    nodes: [usize; 4],
}

impl Element {
    pub fn tri(a: usize, b: usize, c: usize) -> Self {
        Element {
            kind: ElementKind::Tri3,
            nodes: [a, b, c, usize::MAX],
        }
    }

    pub fn quad(a: usize, b: usize, c: usize, d: usize) -> Self {
        Element {
            kind: ElementKind::Quad4,
            nodes: [a, b, c, d],
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.kind.node_count()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub element: usize,
    pub local_edge: usize,
    pub tag: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub xi: [f64; 2],
    pub weight: f64,
}

/// A quadrature rule on a reference element.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureRule {
    pub points: &'static [QuadPoint],
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }
}

const G: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

static QUAD_2X2: [QuadPoint; 4] = [
    QuadPoint {
        xi: [-G, -G],
        weight: 1.0,
    },
    QuadPoint {
        xi: [G, -G],
        weight: 1.0,
    },
    QuadPoint {
        xi: [G, G],
        weight: 1.0,
    },
    QuadPoint {
        xi: [-G, G],
        weight: 1.0,
    },
];

static TRI_1: [QuadPoint; 1] = [QuadPoint {
    xi: [1.0 / 3.0, 1.0 / 3.0],
    weight: 0.5,
}];

static TRI_3: [QuadPoint; 3] = [
    QuadPoint {
        xi: [1.0 / 6.0, 1.0 / 6.0],
        weight: 1.0 / 6.0,
    },
    QuadPoint {
        xi: [2.0 / 3.0, 1.0 / 6.0],
        weight: 1.0 / 6.0,
    },
    QuadPoint {
        xi: [1.0 / 6.0, 2.0 / 3.0],
        weight: 1.0 / 6.0,
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TriangleRule {
    OnePoint,
    #[default]
    ThreePoint,
}

pub fn quadrature(kind: ElementKind, tri_rule: TriangleRule) -> QuadratureRule {
    match (kind, tri_rule) {
        (ElementKind::Quad4, _) => QuadratureRule { points: &QUAD_2X2 },
        (ElementKind::Tri3, TriangleRule::OnePoint) => QuadratureRule { points: &TRI_1 },
        (ElementKind::Tri3, TriangleRule::ThreePoint) => QuadratureRule { points: &TRI_3 },
    }
}

/// Shape functions and their reference derivatives at `xi`.
pub fn reference_shape(kind: ElementKind, xi: [f64; 2]) -> ([f64; 4], [[f64; 2]; 4]) {
    let (s, t) = (xi[0], xi[1]);
    match kind {
        ElementKind::Tri3 => (
            [1.0 - s - t, s, t, 0.0],
            [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
        ),
        ElementKind::Quad4 => {
            const SIGNS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
            let mut n = [0.0; 4];
            let mut dn = [[0.0; 2]; 4];
            for (a, sg) in SIGNS.iter().enumerate() {
                let fs = 1.0 + sg[0] * s;
                let ft = 1.0 + sg[1] * t;
                n[a] = 0.25 * fs * ft;
                dn[a] = [0.25 * sg[0] * ft, 0.25 * sg[1] * fs];
            }
            (n, dn)
        }
    }
}

/// Shape-function data at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeEval {
    pub node_count: usize,
    pub n: [f64; 4],
    /// Spatial gradients of the shape functions (1/mm).
    pub dn_dx: [[f64; 2]; 4],
    pub det_j: f64,
    /// Integration weight including `det J` and, in axisymmetric mode, `2 pi r`.
    pub dv: f64,
    /// Physical location of the point.
    pub x: [f64; 2],
}

impl ShapeEval {
    pub fn interpolate(&self, nodal: &[f64]) -> f64 {
        (0..self.node_count).map(|a| self.n[a] * nodal[a]).sum()
    }

    pub fn gradient(&self, nodal: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for a in 0..self.node_count {
            g[0] += self.dn_dx[a][0] * nodal[a];
            g[1] += self.dn_dx[a][1] * nodal[a];
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub mode: Mode,
    pub coords: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub boundary: Vec<BoundaryEdge>,
    pub tri_rule: TriangleRule,
}

impl Mesh {
    /// Builds a mesh and checks all invariants.
    pub fn new(
        mode: Mode,
        coords: Vec<[f64; 2]>,
        elements: Vec<Element>,
        boundary: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let mesh = Mesh {
            mode,
            coords,
            elements,
            boundary,
            tri_rule: TriangleRule::default(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn quadrature(&self, element: usize) -> QuadratureRule {
        quadrature(self.elements[element].kind, self.tri_rule)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.coords.len();
        for (e, el) in self.elements.iter().enumerate() {
            for &v in el.nodes() {
                if v >= n {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} references node {v} but the mesh has {n} nodes"
                    )));
                }
            }
        }
        for (k, b) in self.boundary.iter().enumerate() {
            if b.element >= self.elements.len() {
                return Err(Error::InvalidMesh(format!(
                    "boundary entry {k} references element {} of {}",
                    b.element,
                    self.elements.len()
                )));
            }
            if b.local_edge >= self.elements[b.element].kind.edge_count() {
                return Err(Error::InvalidMesh(format!(
                    "boundary entry {k} has local edge {} out of range",
                    b.local_edge
                )));
            }
        }
        if self.mode == Mode::Axisymmetric {
            if let Some((i, c)) = self.coords.iter().enumerate().find(|(_, c)| c[0] < 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "node {i} has negative radius {}",
                    c[0]
                )));
            }
        }
        for e in 0..self.elements.len() {
            for qp in self.quadrature(e).points {
                self.shape_eval(e, qp, None)?;
            }
        }
        Ok(())
    }

    /// Shape functions, spatial gradients and integration weight at `qp`,
    /// evaluated on `current` nodal coordinates if given and on the
    /// reference coordinates otherwise.
    pub fn shape_eval(
        &self,
        element: usize,
        qp: &QuadPoint,
        current: Option<&[[f64; 2]]>,
    ) -> Result<ShapeEval> {
        let coords = current.unwrap_or(&self.coords);
        let el = &self.elements[element];
        let nodes = el.nodes();
        let (n, dn) = reference_shape(el.kind, qp.xi);
        let mut jac = [[0.0; 2]; 2];
        let mut x = [0.0; 2];
        for (a, &v) in nodes.iter().enumerate() {
            let c = coords[v];
            for i in 0..2 {
                x[i] += n[a] * c[i];
                for j in 0..2 {
                    jac[i][j] += c[i] * dn[a][j];
                }
            }
        }
        let det_j = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det_j > 0.0) {
            return Err(Error::InvertedElement { element, det_j });
        }
        // dN/dx = dN/dxi * J^{-1}
        let inv = [
            [jac[1][1] / det_j, -jac[0][1] / det_j],
            [-jac[1][0] / det_j, jac[0][0] / det_j],
        ];
        let mut dn_dx = [[0.0; 2]; 4];
        for a in 0..nodes.len() {
            for j in 0..2 {
                dn_dx[a][j] = dn[a][0] * inv[0][j] + dn[a][1] * inv[1][j];
            }
        }
        let mut dv = det_j * qp.weight;
        if self.mode == Mode::Axisymmetric {
            dv *= 2.0 * PI * x[0];
        }
        Ok(ShapeEval {
            node_count: nodes.len(),
            n,
            dn_dx,
            det_j,
            dv,
            x,
        })
    }

    /// All quadrature-point evaluations of one element.
    pub fn element_evals(
        &self,
        element: usize,
        current: Option<&[[f64; 2]]>,
    ) -> Result<Vec<ShapeEval>> {
        self.quadrature(element)
            .points
            .iter()
            .map(|qp| self.shape_eval(element, qp, current))
            .collect()
    }

    /// Element measure (area, or revolved volume in axisymmetric mode).
    pub fn element_measure(&self, element: usize, current: Option<&[[f64; 2]]>) -> Result<f64> {
        Ok(self
            .element_evals(element, current)?
            .iter()
            .map(|s| s.dv)
            .sum())
    }

    pub fn total_measure(&self, current: Option<&[[f64; 2]]>) -> Result<f64> {
        let mut total = 0.0;
        for e in 0..self.elements.len() {
            total += self.element_measure(e, current)?;
        }
        Ok(total)
    }

    /// Number of quadrature points in each element, and the offset of the
    /// first one in a flat per-mesh array.
    pub fn gauss_layout(&self) -> GaussLayout {
        let mut offsets = Vec::with_capacity(self.elements.len() + 1);
        let mut total = 0;
        for e in 0..self.elements.len() {
            offsets.push(total);
            total += self.quadrature(e).len();
        }
        offsets.push(total);
        GaussLayout { offsets }
    }

    /// Nodes that lie on any boundary edge carrying `tag`, sorted and unique.
    pub fn nodes_with_tag(&self, tag: &str) -> Vec<usize> {
        let mut out = Vec::new();
        for b in self.boundary.iter().filter(|b| b.tag == tag) {
            let el = &self.elements[b.element];
            let (i, j) = el.kind.edge_nodes(b.local_edge);
            out.push(el.nodes()[i]);
            out.push(el.nodes()[j]);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for c in &self.coords {
            for i in 0..2 {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        (lo, hi)
    }

    /// Finds an element containing `p` (reference configuration) and the
    /// local coordinates of `p` in it.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        const TOL: f64 = 1e-9;
        for (e, el) in self.elements.iter().enumerate() {
            let nodes = el.nodes();
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for &v in nodes {
                for i in 0..2 {
                    lo[i] = lo[i].min(self.coords[v][i]);
                    hi[i] = hi[i].max(self.coords[v][i]);
                }
            }
            let pad = TOL * (hi[0] - lo[0] + hi[1] - lo[1]);
            if p[0] < lo[0] - pad || p[0] > hi[0] + pad || p[1] < lo[1] - pad || p[1] > hi[1] + pad
            {
                continue;
            }
            let Some(xi) = self.inverse_map(e, p) else {
                continue;
            };
            let inside = match el.kind {
                ElementKind::Tri3 => xi[0] >= -TOL && xi[1] >= -TOL && xi[0] + xi[1] <= 1.0 + TOL,
                ElementKind::Quad4 => xi[0].abs() <= 1.0 + TOL && xi[1].abs() <= 1.0 + TOL,
            };
            if inside {
                return Some((e, xi));
            }
        }
        None
    }

    fn inverse_map(&self, element: usize, p: [f64; 2]) -> Option<[f64; 2]> {
        let el = &self.elements[element];
        let mut xi = match el.kind {
            ElementKind::Tri3 => [1.0 / 3.0, 1.0 / 3.0],
            ElementKind::Quad4 => [0.0, 0.0],
        };
        for _ in 0..50 {
            let (n, dn) = reference_shape(el.kind, xi);
            let mut x = [0.0; 2];
            let mut jac = [[0.0; 2]; 2];
            for (a, &v) in el.nodes().iter().enumerate() {
                let c = self.coords[v];
                for i in 0..2 {
                    x[i] += n[a] * c[i];
                    for j in 0..2 {
                        jac[i][j] += c[i] * dn[a][j];
                    }
                }
            }
            let r = [p[0] - x[0], p[1] - x[1]];
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 {
                return None;
            }
            let d = [
                (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
            ];
            xi[0] += d[0];
            xi[1] += d[1];
            if d[0].abs() + d[1].abs() < 1e-14 {
                return Some(xi);
            }
        }
        Some(xi)
    }
}

/// Offsets of each element's quadrature points in a flat array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussLayout {
    offsets: Vec<usize>,
}

impl GaussLayout {
    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn range(&self, element: usize) -> core::ops::Range<usize> {
        self.offsets[element]..self.offsets[element + 1]
    }
}

/// Parameters of a structured strip mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleSpec {
    /// Extent along the vessel axis (mm).
    pub length: f64,
    /// Wall thickness (mm).
    pub thickness: f64,
    /// Divisions along the length.
    pub nx: usize,
    /// Divisions through the thickness.
    pub ny: usize,
    pub mode: Mode,
    /// Coordinate of the inner surface (the inner radius in axisymmetric mode).
    pub inner_offset: f64,
}

/// Structured quad mesh of a wall strip with boundary tags `inner`,
/// `outer`, `left` and `right`.
///
/// Node `(i, j)` (i along the length, j through the thickness) has index
/// `i * (ny + 1) + j`.
pub fn structured_rectangle(spec: &RectangleSpec) -> Result<Mesh> {
    let RectangleSpec {
        length,
        thickness,
        nx,
        ny,
        mode,
        inner_offset,
    } = *spec;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh("nx and ny must be at least 1".into()));
    }
    if !(length > 0.0 && thickness > 0.0) {
        return Err(Error::InvalidMesh(
            "length and thickness must be positive".into(),
        ));
    }
    let (ax, rad) = (mode.axial_axis(), mode.radial_axis());
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for i in 0..=nx {
        for j in 0..=ny {
            let mut c = [0.0; 2];
            c[ax] = length * i as f64 / nx as f64;
            c[rad] = inner_offset + thickness * j as f64 / ny as f64;
            coords.push(c);
        }
    }
    let id = |i: usize, j: usize| i * (ny + 1) + j;
    let mut elements = Vec::with_capacity(nx * ny);
    let mut boundary = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let mut corners = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            let a = coords[corners[0]];
            let b = coords[corners[1]];
            let d = coords[corners[3]];
            let cross = (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]);
            if cross < 0.0 {
                corners = [corners[0], corners[3], corners[2], corners[1]];
            }
            let e = elements.len();
            elements.push(Element::quad(
                corners[0], corners[1], corners[2], corners[3],
            ));
            let mut tag_edge = |n0: usize, n1: usize, tag: &str| {
                for k in 0..4 {
                    let (p, q) = (corners[k], corners[(k + 1) % 4]);
                    if (p == n0 && q == n1) || (p == n1 && q == n0) {
                        boundary.push(BoundaryEdge {
                            element: e,
                            local_edge: k,
                            tag: tag.into(),
                        });
                    }
                }
            };
            if j == 0 {
                tag_edge(id(i, 0), id(i + 1, 0), "inner");
            }
            if j + 1 == ny {
                tag_edge(id(i, ny), id(i + 1, ny), "outer");
            }
            if i == 0 {
                tag_edge(id(0, j), id(0, j + 1), "left");
            }
            if i + 1 == nx {
                tag_edge(id(nx, j), id(nx, j + 1), "right");
            }
        }
    }
    Mesh::new(mode, coords, elements, boundary)
}
