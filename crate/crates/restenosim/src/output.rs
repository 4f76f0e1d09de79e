//! VTK snapshots, probe and section CSV files, Matrix Market dumps.
//!
//! Floating-point values in CSV files use 17 significant digits so that two
//! runs can be compared byte for byte.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use restenosim_core::coupling::CoupledState;
use restenosim_core::mesh::{ElementKind, Mesh};
use restenosim_core::numerics::CsrMatrix;

use crate::error::{CliError, Result};
use crate::scenario::{nearest_gauss_point, sample};

/// Scientific notation with 17 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Legacy ASCII VTK unstructured grid of `state` on the reference
/// coordinates, with nodal fields and displacement as point data and
/// element-averaged growth stretch and `J` as cell data.
pub fn vtk_text(mesh: &Mesh, state: &CoupledState) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "restenosim t = {}", sci(state.time));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.node_count());
    for c in &mesh.coords {
        let _ = writeln!(s, "{} {} 0", sci(c[0]), sci(c[1]));
    }
    let size: usize = mesh.elements.iter().map(|e| e.nodes().len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", mesh.element_count());
    for el in &mesh.elements {
        let ids: Vec<String> = el.nodes().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", ids.len(), ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.element_count());
    for el in &mesh.elements {
        let code = match el.kind {
            ElementKind::Tri3 => 5,
            ElementKind::Quad4 => 9,
        };
        let _ = writeln!(s, "{code}");
    }
    let _ = writeln!(s, "POINT_DATA {}", mesh.node_count());
    for (name, field) in [
        ("c_P", &state.fields.c_p),
        ("rho_E", &state.fields.rho_e),
        ("rho_S", &state.fields.rho_s),
    ] {
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in field.iter() {
            let _ = writeln!(s, "{}", sci(*v));
        }
    }
    let _ = writeln!(s, "VECTORS displacement double");
    for u in state.displacement.chunks(2) {
        let _ = writeln!(s, "{} {} 0", sci(u[0]), sci(u[1]));
    }
    let (theta, j) = state.element_growth(mesh);
    let _ = writeln!(s, "CELL_DATA {}", mesh.element_count());
    for (name, field) in [("theta", &theta), ("J", &j)] {
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in field.iter() {
            let _ = writeln!(s, "{}", sci(*v));
        }
    }
    s
}

pub fn write_vtk(path: &Path, mesh: &Mesh, state: &CoupledState) -> Result<()> {
    write_file(path, &vtk_text(mesh, state))
}

pub fn write_matrix_market(path: &Path, a: &CsrMatrix) -> Result<()> {
    write_file(path, &a.to_matrix_market())
}

struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    fn create(path: &Path, header: &str) -> Result<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut f = CsvFile {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        f.line(header)?;
        Ok(f)
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}").map_err(|e| CliError::io(&self.path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Time series at fixed probe points: `c_P`, `rho_E`, `rho_S` interpolated
/// at the point and `theta` at the nearest Gauss point.
pub struct ProbeWriter {
    csv: CsvFile,
    points: Vec<[f64; 2]>,
    gauss: Vec<Option<usize>>,
}

impl ProbeWriter {
    pub fn create(path: &Path, mesh: &Mesh, points: &[[f64; 2]]) -> Result<Self> {
        let mut header = String::from("time");
        for k in 0..points.len() {
            for q in ["c_P", "rho_E", "rho_S", "theta"] {
                let _ = write!(header, ",p{k}_{q}");
            }
        }
        for (k, p) in points.iter().enumerate() {
            if mesh.locate(*p).is_none() {
                log::warn!("probe {k} at ({}, {}) is outside the mesh", p[0], p[1]);
            }
        }
        Ok(ProbeWriter {
            csv: CsvFile::create(path, &header)?,
            points: points.to_vec(),
            gauss: points
                .iter()
                .map(|p| nearest_gauss_point(mesh, *p))
                .collect(),
        })
    }

    pub fn record(&mut self, mesh: &Mesh, state: &CoupledState) -> Result<()> {
        let mut row = sci(state.time);
        for (p, g) in self.points.iter().zip(&self.gauss) {
            let f = &state.fields;
            for field in [&f.c_p, &f.rho_e, &f.rho_s] {
                let v = sample(mesh, field, *p).unwrap_or(f64::NAN);
                row.push(',');
                row.push_str(&sci(v));
            }
            let theta = g.map_or(f64::NAN, |g| state.growth[g].theta);
            row.push(',');
            row.push_str(&sci(theta));
        }
        self.csv.line(&row)
    }

    pub fn flush(&mut self) -> Result<()> {
        self.csv.flush()
    }
}

/// Fields sampled along section A-A, one row per point and output time.
pub struct SectionWriter {
    csv: CsvFile,
    points: Vec<[f64; 2]>,
}

impl SectionWriter {
    pub fn create(path: &Path, points: &[[f64; 2]]) -> Result<Self> {
        Ok(SectionWriter {
            csv: CsvFile::create(path, "time,s,x,y,c_P,rho_E,rho_S")?,
            points: points.to_vec(),
        })
    }

    pub fn record(&mut self, mesh: &Mesh, state: &CoupledState) -> Result<()> {
        let origin = self.points[0];
        for p in self.points.clone() {
            let s = ((p[0] - origin[0]).powi(2) + (p[1] - origin[1]).powi(2)).sqrt();
            let f = &state.fields;
            let vals: Vec<String> = [&f.c_p, &f.rho_e, &f.rho_s]
                .iter()
                .map(|field| sci(sample(mesh, field, p).unwrap_or(f64::NAN)))
                .collect();
            let row = format!(
                "{},{},{},{},{}",
                sci(state.time),
                sci(s),
                sci(p[0]),
                sci(p[1]),
                vals.join(",")
            );
            self.csv.line(&row)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.csv.flush()
    }
}

/// Numeric table of a CSV file with a header row.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let row: std::result::Result<Vec<f64>, _> = l.split(',').map(str::parse).collect();
        rows.push(row.map_err(|_| {
            CliError::Usage(format!("{}: bad number on line {}", path.display(), i + 2))
        })?);
    }
    Ok((header, rows))
}
