//! Plain-text mesh format.
//!
//! ```text
//! mode plane|axisym
//! nodes <count>
//! x y
//! elements <count>
//! tri i j k | quad i j k l      (0-based, counter-clockwise)
//! boundary <count>
//! <element> <local-edge> <tag>
//! ```
//!
//! `#` starts a comment; blank lines are skipped.

use std::fmt::Write as _;
use std::path::Path;

use restenosim_core::mesh::{BoundaryEdge, Element, ElementKind, Mesh, Mode};

use crate::config::parse_mode;
use crate::error::CliError;

/// Parse failure with its 1-based line number.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("mesh line {line}: {message}")]
pub struct MeshParseError {
    pub line: usize,
    pub message: String,
}

struct Lines<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        Lines {
            inner: Box::new(inner),
            last: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), MeshParseError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l.split_whitespace().collect()))
            }
            None => Err(MeshParseError {
                line: self.last + 1,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> MeshParseError {
    MeshParseError {
        line,
        message: message.into(),
    }
}

fn header(lines: &mut Lines<'_>, name: &str) -> Result<usize, MeshParseError> {
    let (n, f) = lines.next(name)?;
    match f.as_slice() {
        [h, c] if *h == name => c
            .parse()
            .map_err(|_| err(n, format!("bad {name} count `{c}`"))),
        _ => Err(err(n, format!("expected `{name} <count>`"))),
    }
}

fn index(line: usize, s: &str) -> Result<usize, MeshParseError> {
    s.parse().map_err(|_| err(line, format!("bad index `{s}`")))
}

/// Mode, coordinates, elements and boundary edges of a parsed mesh.
pub type MeshParts = (Mode, Vec<[f64; 2]>, Vec<Element>, Vec<BoundaryEdge>);

/// Parses mesh text without geometric validation.
pub fn parse_mesh_text(text: &str) -> Result<MeshParts, MeshParseError> {
    let mut lines = Lines::new(text);
    let (n, f) = lines.next("mode")?;
    let mode = match f.as_slice() {
        ["mode", m] => parse_mode(m).ok_or_else(|| err(n, format!("unknown mode `{m}`")))?,
        _ => return Err(err(n, "expected `mode plane|axisym`")),
    };
    let count = header(&mut lines, "nodes")?;
    let mut coords = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, f) = lines.next("node coordinates")?;
        if f.len() != 2 {
            return Err(err(n, "expected `x y`"));
        }
        let x: f64 = f[0]
            .parse()
            .map_err(|_| err(n, format!("bad number `{}`", f[0])))?;
        let y: f64 = f[1]
            .parse()
            .map_err(|_| err(n, format!("bad number `{}`", f[1])))?;
        coords.push([x, y]);
    }
    let count = header(&mut lines, "elements")?;
    let mut elements = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, f) = lines.next("element")?;
        let el = match f.as_slice() {
            ["tri", a, b, c] => Element::tri(index(n, a)?, index(n, b)?, index(n, c)?),
            ["quad", a, b, c, d] => {
                Element::quad(index(n, a)?, index(n, b)?, index(n, c)?, index(n, d)?)
            }
            _ => return Err(err(n, "expected `tri i j k` or `quad i j k l`")),
        };
        elements.push(el);
    }
    let count = header(&mut lines, "boundary")?;
    let mut boundary = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, f) = lines.next("boundary edge")?;
        match f.as_slice() {
            [e, edge, tag] => boundary.push(BoundaryEdge {
                element: index(n, e)?,
                local_edge: index(n, edge)?,
                tag: tag.to_string(),
            }),
            _ => return Err(err(n, "expected `<element> <local-edge> <tag>`")),
        }
    }
    if let Some((n, _)) = lines.inner.next() {
        return Err(err(n, "trailing content after boundary section"));
    }
    Ok((mode, coords, elements, boundary))
}

/// Parses and validates a mesh.
pub fn parse_mesh(text: &str) -> Result<Mesh, CliError> {
    let (mode, coords, elements, boundary) = parse_mesh_text(text)?;
    Ok(Mesh::new(mode, coords, elements, boundary)?)
}

pub fn load_mesh(path: &Path) -> Result<Mesh, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_mesh(&text)
}

pub fn mesh_to_text(mesh: &Mesh) -> String {
    let mut s = String::new();
    let mode = match mesh.mode {
        Mode::Plane => "plane",
        Mode::Axisymmetric => "axisym",
    };
    let _ = writeln!(s, "mode {mode}");
    let _ = writeln!(s, "nodes {}", mesh.node_count());
    for c in &mesh.coords {
        let _ = writeln!(s, "{:?} {:?}", c[0], c[1]);
    }
    let _ = writeln!(s, "elements {}", mesh.element_count());
    for el in &mesh.elements {
        let name = match el.kind {
            ElementKind::Tri3 => "tri",
            ElementKind::Quad4 => "quad",
        };
        let ids: Vec<String> = el.nodes().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{name} {}", ids.join(" "));
    }
    let _ = writeln!(s, "boundary {}", mesh.boundary.len());
    for b in &mesh.boundary {
        let _ = writeln!(s, "{} {} {}", b.element, b.local_edge, b.tag);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use restenosim_core::mesh::{structured_rectangle, RectangleSpec};
    use restenosim_core::Error;

    const UNIT: &str = "mode plane\nnodes 4\n0 0\n1 0\n1 1\n0 1\nelements 1\nquad 0 1 2 3\n\
                        boundary 1\n0 0 bottom\n";

    #[test]
    fn unit_square() {
        let m = parse_mesh(UNIT).unwrap();
        assert_eq!(m.element_count(), 1);
        let qp = m.quadrature(0).points[0];
        assert!((m.shape_eval(0, &qp, None).unwrap().det_j - 0.25).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_node() {
        let bad = UNIT.replace("quad 0 1 2 3", "quad 0 1 2 99");
        match parse_mesh(&bad) {
            Err(CliError::Core(Error::InvalidMesh(msg))) => assert!(msg.contains("99")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_line() {
        let bad = UNIT.replace("1 0\n", "1 zero\n");
        match parse_mesh_text(&bad) {
            Err(e) => assert_eq!(e.line, 4),
            Ok(_) => panic!("accepted"),
        }
    }

    #[test]
    fn inverted_element_is_named() {
        let bad = UNIT.replace("quad 0 1 2 3", "quad 0 3 2 1");
        assert!(matches!(
            parse_mesh(&bad),
            Err(CliError::Core(Error::InvertedElement { element: 0, .. }))
        ));
    }

    #[test]
    fn generated_mesh_round_trips() {
        let m = structured_rectangle(&RectangleSpec {
            length: 6.0,
            thickness: 0.8,
            nx: 10,
            ny: 4,
            mode: Mode::Axisymmetric,
            inner_offset: 1.5,
        })
        .unwrap();
        assert_eq!((m.element_count(), m.node_count()), (40, 55));
        assert_eq!(parse_mesh(&mesh_to_text(&m)).unwrap(), m);
    }
}
