//! Line-based `section.key = value` configuration.
//!
//! `#` starts a comment, blank lines are ignored, and every key not listed in
//! [`SimulationConfig::entries`] is an error. List values separate items
//! with `;` and fields with whitespace; `none` is the empty list.

use std::fmt;
use std::path::{Path, PathBuf};

use restenosim_core::fct::FctOptions;
use restenosim_core::mechanics::{MaterialParams, NewtonOptions};
use restenosim_core::mesh::{Mode, TriangleRule};
use restenosim_core::transport::{EcmMass, Stabilization, TransportOptions, TransportParams};

/// Parse or validation failure, located by key and (when read from text)
/// by line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: None,
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    /// Mesh file; when absent the structured strip below is generated.
    pub file: Option<PathBuf>,
    pub mode: Mode,
    pub length: f64,
    pub thickness: f64,
    pub nx: usize,
    pub ny: usize,
    /// Inner radius in axisymmetric mode, offset of the inner surface in
    /// plane mode.
    pub inner_radius: f64,
    pub triangle_rule: TriangleRule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dt_min: f64,
    /// Output interval (day).
    pub cadence: f64,
}

/// Gaussian PDGF peak `A exp(-|x - c|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub center: [f64; 2],
    pub sigma: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub rho_e0: f64,
    pub rho_s0: f64,
    /// Amplitude of the default peaks (mol/mm^3).
    pub amplitude: f64,
    /// Width of the default peaks (mm).
    pub sigma: f64,
    /// Explicit peaks; `None` places three peaks at 25, 50 and 75 % of the
    /// length on the inner surface.
    pub peaks: Option<Vec<Peak>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TractionSpec {
    pub tag: String,
    pub value: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluxSpec {
    pub tag: String,
    pub pdgf: f64,
    pub smc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConfig {
    /// Tags whose nodes are clamped in the mechanics problem.
    pub fixed: Vec<String>,
    pub tractions: Vec<TractionSpec>,
    /// Transport influx; empty means zero flux everywhere.
    pub influx: Vec<InfluxSpec>,
}

/// Straight sampling line from `from` to `to` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionLine {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub points: usize,
}

impl SectionLine {
    pub fn samples(&self) -> Vec<[f64; 2]> {
        let n = self.points.max(2);
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                [
                    self.from[0] + s * (self.to[0] - self.from[0]),
                    self.from[1] + s * (self.to[1] - self.from[1]),
                ]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Probe points; `None` uses the centre of the middle default peak.
    pub probes: Option<Vec<[f64; 2]>>,
    /// Section A-A; `None` runs through the thickness at mid-length.
    pub section: Option<SectionLine>,
    pub vtk: bool,
    pub matrix_market: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    pub transport: TransportParams,
    pub material: MaterialParams,
    /// Grown directions; `None` picks 3 (axisymmetric) or 2 (plane).
    pub growth_dimension: Option<u32>,
    pub initial: InitialConfig,
    pub boundary: BoundaryConfig,
    pub transport_options: TransportOptions,
    pub newton: NewtonOptions,
    pub output: OutputConfig,
}

/// Peak amplitude at which the equilibrium ECM deficit under the peak,
/// `gamma A rho_E,th / (beta rho_S + gamma A rho_E,th)`, equals the initial
/// deficit `1 - rho_E,0 / rho_E,th = 1/11`: `A = beta rho_S / (10 gamma rho_E,th)`.
pub const DEFAULT_PEAK_AMPLITUDE: f64 = 4.1e-12;

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            mesh: MeshConfig {
                file: None,
                mode: Mode::Axisymmetric,
                length: 6.0,
                thickness: 0.8,
                nx: 60,
                ny: 8,
                inner_radius: 1.5,
                triangle_rule: TriangleRule::ThreePoint,
            },
            time: TimeConfig {
                dt: 0.01,
                t_end: 1.0,
                dt_min: 1e-6,
                cadence: 0.05,
            },
            transport: TransportParams::default(),
            material: MaterialParams::default(),
            growth_dimension: None,
            initial: InitialConfig {
                rho_e0: 7.0e-9,
                rho_s0: 3.16e6,
                amplitude: DEFAULT_PEAK_AMPLITUDE,
                sigma: 0.2,
                peaks: None,
            },
            boundary: BoundaryConfig {
                fixed: vec!["left".into(), "right".into()],
                tractions: Vec::new(),
                influx: Vec::new(),
            },
            transport_options: TransportOptions::default(),
            newton: NewtonOptions::default(),
            output: OutputConfig {
                probes: None,
                section: None,
                vtk: true,
                matrix_market: false,
            },
        }
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Plane => "plane",
        Mode::Axisymmetric => "axisym",
    }
}

pub fn parse_mode(s: &str) -> Option<Mode> {
    match s {
        "plane" => Some(Mode::Plane),
        "axisym" | "axisymmetric" => Some(Mode::Axisymmetric),
        _ => None,
    }
}

fn float(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|_| invalid(key, format!("expected a number, got `{v}`")))
}

fn uint(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>()
        .map_err(|_| invalid(key, format!("expected a non-negative integer, got `{v}`")))
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(invalid(key, format!("expected true or false, got `{v}`"))),
    }
}

/// Splits a list value into items of whitespace-separated fields.
fn items(v: &str) -> Vec<Vec<&str>> {
    if v.trim() == "none" {
        return Vec::new();
    }
    v.split(';')
        .map(|it| it.split_whitespace().collect::<Vec<_>>())
        .filter(|f| !f.is_empty())
        .collect()
}

fn floats<const N: usize>(key: &str, fields: &[&str]) -> Result<[f64; N], ConfigError> {
    if fields.len() != N {
        return Err(invalid(
            key,
            format!("expected {N} numbers per item, got {}", fields.len()),
        ));
    }
    let mut out = [0.0; N];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = float(key, f)?;
    }
    Ok(out)
}

fn list<T>(v: &[T], f: impl Fn(&T) -> String) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.iter().map(f).collect::<Vec<_>>().join("; ")
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

impl SimulationConfig {
    /// Every key with its current value, in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let t = &self.transport;
        let m = &self.material;
        let mut e = vec![
            ("mesh.mode", mode_name(self.mesh.mode).to_string()),
            ("mesh.length", num(self.mesh.length)),
            ("mesh.thickness", num(self.mesh.thickness)),
            ("mesh.nx", self.mesh.nx.to_string()),
            ("mesh.ny", self.mesh.ny.to_string()),
            ("mesh.inner_radius", num(self.mesh.inner_radius)),
            (
                "mesh.triangle_rule",
                match self.mesh.triangle_rule {
                    TriangleRule::OnePoint => "1",
                    TriangleRule::ThreePoint => "3",
                }
                .to_string(),
            ),
            ("time.dt", num(self.time.dt)),
            ("time.t_end", num(self.time.t_end)),
            ("time.dt_min", num(self.time.dt_min)),
            ("time.cadence", num(self.time.cadence)),
            ("transport.D_P", num(t.d_p)),
            ("transport.alpha", num(t.alpha)),
            ("transport.beta", num(t.beta)),
            ("transport.gamma", num(t.gamma)),
            ("transport.chi", num(t.chi)),
            ("transport.kappa", num(t.kappa)),
            ("transport.rho_E_th", num(t.rho_e_th)),
            ("transport.rho_S_h", num(t.rho_s_h)),
            ("material.mu", num(m.mu)),
            ("material.lambda", num(m.lambda)),
            ("material.k1", num(m.k1)),
            ("material.k2", num(m.k2)),
            ("material.kappa", num(m.kappa)),
            ("material.fiber_angle", num(m.fiber_angle_deg)),
            ("initial.rho_E0", num(self.initial.rho_e0)),
            ("initial.rho_S0", num(self.initial.rho_s0)),
            ("initial.amplitude", num(self.initial.amplitude)),
            ("initial.sigma", num(self.initial.sigma)),
            (
                "boundary.fixed",
                if self.boundary.fixed.is_empty() {
                    "none".into()
                } else {
                    self.boundary.fixed.join(" ")
                },
            ),
            (
                "boundary.traction",
                list(&self.boundary.tractions, |t| {
                    format!("{} {} {}", t.tag, num(t.value[0]), num(t.value[1]))
                }),
            ),
            (
                "boundary.influx",
                list(&self.boundary.influx, |b| {
                    format!("{} {} {}", b.tag, num(b.pdgf), num(b.smc))
                }),
            ),
            (
                "stabilization.fct",
                (self.transport_options.stabilization == Stabilization::Fct).to_string(),
            ),
            (
                "stabilization.fct_pdgf",
                self.transport_options.fct_pdgf.to_string(),
            ),
            (
                "stabilization.prelimit",
                self.transport_options.fct.prelimit.to_string(),
            ),
            (
                "stabilization.ecm_mass",
                match self.transport_options.ecm_mass {
                    EcmMass::Lumped => "lumped",
                    EcmMass::Consistent => "consistent",
                }
                .to_string(),
            ),
            ("solver.max_iters", self.newton.max_iters.to_string()),
            ("solver.abs_tol", num(self.newton.abs_tol)),
            ("solver.rel_tol", num(self.newton.rel_tol)),
            ("output.vtk", self.output.vtk.to_string()),
            (
                "output.matrix_market",
                self.output.matrix_market.to_string(),
            ),
        ];
        if let Some(f) = &self.mesh.file {
            e.insert(0, ("mesh.file", f.display().to_string()));
        }
        if let Some(d) = self.growth_dimension {
            e.push(("growth.dimension", d.to_string()));
        }
        if let Some(p) = &self.initial.peaks {
            e.push((
                "initial.peaks",
                list(p, |p| {
                    format!(
                        "{} {} {} {}",
                        num(p.center[0]),
                        num(p.center[1]),
                        num(p.sigma),
                        num(p.amplitude)
                    )
                }),
            ));
        }
        if let Some(p) = &self.output.probes {
            e.push((
                "output.probes",
                list(p, |p| format!("{} {}", num(p[0]), num(p[1]))),
            ));
        }
        if let Some(s) = &self.output.section {
            e.push((
                "output.section",
                format!(
                    "{} {} {} {} {}",
                    num(s.from[0]),
                    num(s.from[1]),
                    num(s.to[0]),
                    num(s.to[1]),
                    s.points
                ),
            ));
        }
        e
    }

    /// Assigns one key. Values are checked for syntax only; see
    /// [`SimulationConfig::validate`] for ranges.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let t = &mut self.transport;
        let m = &mut self.material;
        match key {
            "mesh.file" => self.mesh.file = Some(PathBuf::from(v)),
            "mesh.mode" => {
                self.mesh.mode = parse_mode(v)
                    .ok_or_else(|| invalid(key, format!("expected plane or axisym, got `{v}`")))?
            }
            "mesh.length" => self.mesh.length = float(key, v)?,
            "mesh.thickness" => self.mesh.thickness = float(key, v)?,
            "mesh.nx" => self.mesh.nx = uint(key, v)?,
            "mesh.ny" => self.mesh.ny = uint(key, v)?,
            "mesh.inner_radius" => self.mesh.inner_radius = float(key, v)?,
            "mesh.triangle_rule" => {
                self.mesh.triangle_rule = match v {
                    "1" => TriangleRule::OnePoint,
                    "3" => TriangleRule::ThreePoint,
                    _ => return Err(invalid(key, format!("expected 1 or 3, got `{v}`"))),
                }
            }
            "time.dt" => self.time.dt = float(key, v)?,
            "time.t_end" => self.time.t_end = float(key, v)?,
            "time.dt_min" => self.time.dt_min = float(key, v)?,
            "time.cadence" => self.time.cadence = float(key, v)?,
            "transport.D_P" => t.d_p = float(key, v)?,
            "transport.alpha" => t.alpha = float(key, v)?,
            "transport.beta" => t.beta = float(key, v)?,
            "transport.gamma" => t.gamma = float(key, v)?,
            "transport.chi" => t.chi = float(key, v)?,
            "transport.kappa" => t.kappa = float(key, v)?,
            "transport.rho_E_th" => t.rho_e_th = float(key, v)?,
            "transport.rho_S_h" => t.rho_s_h = float(key, v)?,
            "material.mu" => m.mu = float(key, v)?,
            "material.lambda" => m.lambda = float(key, v)?,
            "material.k1" => m.k1 = float(key, v)?,
            "material.k2" => m.k2 = float(key, v)?,
            "material.kappa" => m.kappa = float(key, v)?,
            "material.fiber_angle" => m.fiber_angle_deg = float(key, v)?,
            "growth.dimension" => {
                self.growth_dimension =
                    Some(u32::try_from(uint(key, v)?).map_err(|_| invalid(key, "out of range"))?)
            }
            "initial.rho_E0" => self.initial.rho_e0 = float(key, v)?,
            "initial.rho_S0" => self.initial.rho_s0 = float(key, v)?,
            "initial.amplitude" => self.initial.amplitude = float(key, v)?,
            "initial.sigma" => self.initial.sigma = float(key, v)?,
            "initial.peaks" => {
                let mut peaks = Vec::new();
                for it in items(v) {
                    let [x, y, sigma, amplitude] = floats::<4>(key, &it)?;
                    peaks.push(Peak {
                        center: [x, y],
                        sigma,
                        amplitude,
                    });
                }
                self.initial.peaks = Some(peaks);
            }
            "boundary.fixed" => {
                self.boundary.fixed = if v.trim() == "none" {
                    Vec::new()
                } else {
                    v.split_whitespace().map(String::from).collect()
                }
            }
            "boundary.traction" => {
                let mut out = Vec::new();
                for it in items(v) {
                    let (tag, rest) = it.split_first().ok_or_else(|| invalid(key, "empty item"))?;
                    out.push(TractionSpec {
                        tag: tag.to_string(),
                        value: floats::<2>(key, rest)?,
                    });
                }
                self.boundary.tractions = out;
            }
            "boundary.influx" => {
                let mut out = Vec::new();
                for it in items(v) {
                    let (tag, rest) = it.split_first().ok_or_else(|| invalid(key, "empty item"))?;
                    let [pdgf, smc] = floats::<2>(key, rest)?;
                    out.push(InfluxSpec {
                        tag: tag.to_string(),
                        pdgf,
                        smc,
                    });
                }
                self.boundary.influx = out;
            }
            "stabilization.fct" => {
                self.transport_options.stabilization = if boolean(key, v)? {
                    Stabilization::Fct
                } else {
                    Stabilization::None
                }
            }
            "stabilization.fct_pdgf" => self.transport_options.fct_pdgf = boolean(key, v)?,
            "stabilization.prelimit" => {
                self.transport_options.fct = FctOptions {
                    prelimit: boolean(key, v)?,
                }
            }
            "stabilization.ecm_mass" => {
                self.transport_options.ecm_mass = match v {
                    "lumped" => EcmMass::Lumped,
                    "consistent" => EcmMass::Consistent,
                    _ => {
                        return Err(invalid(
                            key,
                            format!("expected lumped or consistent, got `{v}`"),
                        ))
                    }
                }
            }
            "solver.max_iters" => self.newton.max_iters = uint(key, v)?,
            "solver.abs_tol" => self.newton.abs_tol = float(key, v)?,
            "solver.rel_tol" => self.newton.rel_tol = float(key, v)?,
            "output.vtk" => self.output.vtk = boolean(key, v)?,
            "output.matrix_market" => self.output.matrix_market = boolean(key, v)?,
            "output.probes" => {
                let mut out = Vec::new();
                for it in items(v) {
                    out.push(floats::<2>(key, &it)?);
                }
                self.output.probes = Some(out);
            }
            "output.section" => {
                let f: Vec<&str> = v.split_whitespace().collect();
                if f.len() != 5 {
                    return Err(invalid(key, "expected `x0 y0 x1 y1 points`"));
                }
                let [x0, y0, x1, y1] = floats::<4>(key, &f[..4])?;
                self.output.section = Some(SectionLine {
                    from: [x0, y0],
                    to: [x1, y1],
                    points: uint(key, f[4])?,
                });
            }
            _ => return Err(invalid(key, "unknown key")),
        }
        Ok(())
    }

    /// Parses configuration text over the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SimulationConfig::default();
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: Some(line_no),
                    key: line.to_string(),
                    message: "expected `section.key = value`".into(),
                });
            };
            let key = key.trim();
            cfg.set(key, value.trim()).map_err(|mut e| {
                e.line = Some(line_no);
                e
            })?;
            lines.push((key.to_string(), line_no));
        }
        cfg.validate().map_err(|mut e| {
            e.line = lines
                .iter()
                .rev()
                .find(|(k, _)| *k == e.key)
                .map(|(_, l)| *l);
            e
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(&path.display().to_string(), format!("cannot read: {e}")))?;
        Self::parse(&text)
    }

    /// Canonical text; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    pub fn growth_dimension(&self) -> u32 {
        self.growth_dimension.unwrap_or(match self.mesh.mode {
            Mode::Axisymmetric => 3,
            Mode::Plane => 2,
        })
    }

    /// Coordinate of the inner surface.
    pub fn inner_offset(&self) -> f64 {
        self.mesh.inner_radius
    }

    /// Physical point at axial position `z` and through-wall depth `depth`.
    pub fn wall_point(&self, z: f64, depth: f64) -> [f64; 2] {
        let mut p = [0.0; 2];
        p[self.mesh.mode.axial_axis()] = z;
        p[self.mesh.mode.radial_axis()] = self.inner_offset() + depth;
        p
    }

    /// Explicit peaks, or the three default peaks on the inner surface.
    pub fn peaks(&self) -> Vec<Peak> {
        self.initial.peaks.clone().unwrap_or_else(|| {
            [0.25, 0.5, 0.75]
                .iter()
                .map(|f| Peak {
                    center: self.wall_point(f * self.mesh.length, 0.0),
                    sigma: self.initial.sigma,
                    amplitude: self.initial.amplitude,
                })
                .collect()
        })
    }

    pub fn probes(&self) -> Vec<[f64; 2]> {
        self.output
            .probes
            .clone()
            .unwrap_or_else(|| vec![self.wall_point(0.5 * self.mesh.length, 0.0)])
    }

    /// Section A-A: through the wall at mid-length, 17 samples.
    pub fn section(&self) -> SectionLine {
        self.output.section.unwrap_or_else(|| SectionLine {
            from: self.wall_point(0.5 * self.mesh.length, 0.0),
            to: self.wall_point(0.5 * self.mesh.length, self.mesh.thickness),
            points: 17,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let pos = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive, got {v:e}")))
            }
        };
        let non_neg = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be non-negative, got {v:e}")))
            }
        };
        if self.mesh.file.is_none() {
            pos("mesh.length", self.mesh.length)?;
            pos("mesh.thickness", self.mesh.thickness)?;
            if self.mesh.nx == 0 {
                return Err(invalid("mesh.nx", "must be at least 1"));
            }
            if self.mesh.ny == 0 {
                return Err(invalid("mesh.ny", "must be at least 1"));
            }
            non_neg("mesh.inner_radius", self.mesh.inner_radius)?;
        }
        let tm = &self.time;
        pos("time.dt", tm.dt)?;
        pos("time.cadence", tm.cadence)?;
        non_neg("time.t_end", tm.t_end)?;
        non_neg("time.dt_min", tm.dt_min)?;
        if tm.dt_min > tm.dt {
            return Err(invalid("time.dt_min", "must not exceed time.dt"));
        }
        if tm.t_end > 0.0 && tm.dt > tm.t_end {
            return Err(invalid("time.dt", "must not exceed time.t_end"));
        }
        let t = &self.transport;
        pos("transport.D_P", t.d_p)?;
        non_neg("transport.alpha", t.alpha)?;
        non_neg("transport.beta", t.beta)?;
        non_neg("transport.gamma", t.gamma)?;
        non_neg("transport.chi", t.chi)?;
        non_neg("transport.kappa", t.kappa)?;
        pos("transport.rho_E_th", t.rho_e_th)?;
        pos("transport.rho_S_h", t.rho_s_h)?;
        let m = &self.material;
        pos("material.mu", m.mu)?;
        pos("material.lambda", m.lambda)?;
        pos("material.k1", m.k1)?;
        pos("material.k2", m.k2)?;
        if !(0.0..=1.0 / 3.0).contains(&m.kappa) {
            return Err(invalid("material.kappa", "must lie in [0, 1/3]"));
        }
        if !m.fiber_angle_deg.is_finite() {
            return Err(invalid("material.fiber_angle", "must be finite"));
        }
        if let Some(d) = self.growth_dimension {
            if !(2..=3).contains(&d) {
                return Err(invalid("growth.dimension", "must be 2 or 3"));
            }
        }
        non_neg("initial.rho_E0", self.initial.rho_e0)?;
        if self.initial.rho_e0 > t.rho_e_th {
            return Err(invalid(
                "initial.rho_E0",
                "must not exceed transport.rho_E_th",
            ));
        }
        non_neg("initial.rho_S0", self.initial.rho_s0)?;
        non_neg("initial.amplitude", self.initial.amplitude)?;
        pos("initial.sigma", self.initial.sigma)?;
        for p in self.initial.peaks.iter().flatten() {
            pos("initial.peaks", p.sigma)?;
            non_neg("initial.peaks", p.amplitude)?;
        }
        for b in &self.boundary.influx {
            if !(b.pdgf.is_finite() && b.smc.is_finite()) {
                return Err(invalid("boundary.influx", "values must be finite"));
            }
        }
        if self.newton.max_iters == 0 {
            return Err(invalid("solver.max_iters", "must be at least 1"));
        }
        non_neg("solver.abs_tol", self.newton.abs_tol)?;
        non_neg("solver.rel_tol", self.newton.rel_tol)?;
        if let Some(s) = &self.output.section {
            if s.points < 2 {
                return Err(invalid("output.section", "needs at least 2 points"));
            }
        }
        Ok(())
    }
}
