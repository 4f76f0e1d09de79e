//! Command implementations shared by the binary and the tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use restenosim_core::coupling::CoupledState;
use restenosim_core::mechanics::{
    free_energy, material_tangent, pk1_stress, tensor, Kinematics, StructureTensors,
};
use restenosim_core::transport::TransportOperators;
use restenosim_core::Error;

use crate::config::SimulationConfig;
use crate::error::{CliError, Result};
use crate::output::{read_csv, sci, write_matrix_market, write_vtk, ProbeWriter, SectionWriter};
use crate::scenario::{build_mesh, build_model, initial_state, sample};

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: CoupledState,
    pub steps: usize,
    pub snapshots: usize,
    /// Smallest and largest Gauss-point growth stretch over all outputs and
    /// the final state.
    pub theta_range: (f64, f64),
    pub newton_iterations: usize,
    pub clamped: usize,
    /// Most halvings any single step needed.
    pub halvings: usize,
    pub wall_time: Duration,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Runs the configured scenario and writes `config.cfg`, `probes.csv`,
/// `section.csv` and (if enabled) `state_NNNN.vtk` snapshots into `out`.
/// Files written before a solver failure are flushed.
pub fn run_simulation(cfg: &SimulationConfig, out: &Path, coupled: bool) -> Result<RunSummary> {
    let start = Instant::now();
    create_dir(out)?;
    std::fs::write(out.join("config.cfg"), cfg.serialize())
        .map_err(|e| CliError::io(&out.join("config.cfg"), e))?;
    let mesh = build_mesh(cfg)?;
    let model = build_model(cfg, &mesh, coupled)?;
    let initial = initial_state(cfg, &mesh)?;
    if cfg.output.matrix_market {
        let ops = TransportOperators::assemble(&mesh, &initial.fields, &cfg.transport, None)?;
        write_matrix_market(&out.join("mass.mtx"), &ops.mass)?;
        let smc = ops
            .chemotaxis
            .linear_combination(1.0, &ops.proliferation, -1.0)?;
        write_matrix_market(&out.join("smc_operator.mtx"), &smc)?;
    }
    let mut probes = ProbeWriter::create(&out.join("probes.csv"), &mesh, &cfg.probes())?;
    let mut section = SectionWriter::create(&out.join("section.csv"), &cfg.section().samples())?;
    let mut sink_error: Option<CliError> = None;
    let mut snapshots = 0usize;
    let mut theta_range = (f64::INFINITY, f64::NEG_INFINITY);
    let result = model.run(
        initial,
        cfg.time.t_end,
        cfg.time.dt,
        cfg.time.cadence,
        |state, report| {
            theta_range = theta_range_of(state, theta_range);
            let written = (|| -> Result<()> {
                probes.record(&mesh, state)?;
                section.record(&mesh, state)?;
                if cfg.output.vtk {
                    write_vtk(&out.join(format!("state_{snapshots:04}.vtk")), &mesh, state)?;
                }
                Ok(())
            })();
            snapshots += 1;
            log::info!(
                "t = {:.6} step {} newton {} clamped {}",
                state.time,
                state.step,
                report.newton_iterations,
                report.clamped
            );
            written.map_err(|e| {
                let msg = e.to_string();
                sink_error = Some(e);
                Error::OutputFailed(msg)
            })
        },
    );
    probes.flush()?;
    section.flush()?;
    let (final_state, totals) = match result {
        Ok(r) => r,
        Err(e) => return Err(sink_error.unwrap_or(CliError::Core(e))),
    };
    if let Err(msg) = final_state.fields.check_invariants(&cfg.transport) {
        log::warn!("final state: {msg}");
    }
    Ok(RunSummary {
        steps: final_state.step,
        snapshots,
        theta_range: theta_range_of(&final_state, theta_range),
        newton_iterations: totals.newton_iterations,
        clamped: totals.clamped,
        halvings: totals.halvings,
        final_state,
        wall_time: start.elapsed(),
    })
}

fn theta_range_of(state: &CoupledState, seen: (f64, f64)) -> (f64, f64) {
    state
        .growth
        .iter()
        .fold(seen, |(lo, hi), g| (lo.min(g.theta), hi.max(g.theta)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    /// SMC density at the section samples at `t_end`.
    pub profile: Vec<f64>,
    /// RMS difference to the previous level, relative to `rho_S,h`.
    pub difference: Option<f64>,
    /// Ratio of this difference to the previous one.
    pub ratio: Option<f64>,
}

/// Transport-only runs on `levels` successively halved meshes and time
/// steps, starting from the configured resolution.
pub fn convergence(cfg: &SimulationConfig, levels: usize) -> Result<Vec<ConvergenceLevel>> {
    if cfg.mesh.file.is_some() {
        return Err(CliError::Usage(
            "convergence needs a generated mesh, not mesh.file".into(),
        ));
    }
    if levels < 2 {
        return Err(CliError::Usage(
            "convergence needs at least 2 levels".into(),
        ));
    }
    let points = cfg.section().samples();
    let mut out: Vec<ConvergenceLevel> = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut c = cfg.clone();
        c.mesh.nx = cfg.mesh.nx << k;
        c.mesh.ny = cfg.mesh.ny << k;
        c.time.dt = cfg.time.dt / (1u64 << k) as f64;
        c.time.dt_min = c.time.dt_min.min(c.time.dt);
        let mesh = build_mesh(&c)?;
        let model = build_model(&c, &mesh, false)?;
        let (state, _) = model.run(
            initial_state(&c, &mesh)?,
            c.time.t_end,
            c.time.dt,
            c.time.t_end.max(c.time.dt),
            |_, _| Ok(()),
        )?;
        let profile: Vec<f64> = points
            .iter()
            .map(|p| sample(&mesh, &state.fields.rho_s, *p).unwrap_or(f64::NAN))
            .collect();
        let difference = out.last().map(|prev| {
            let sq: f64 = prev
                .profile
                .iter()
                .zip(&profile)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (sq / profile.len() as f64).sqrt() / cfg.transport.rho_s_h
        });
        let ratio = match (out.last().and_then(|p| p.difference), difference) {
            (Some(a), Some(b)) => Some(b / a),
            _ => None,
        };
        log::info!(
            "level {k}: {}x{} dt {} done",
            c.mesh.nx,
            c.mesh.ny,
            c.time.dt
        );
        out.push(ConvergenceLevel {
            nx: c.mesh.nx,
            ny: c.mesh.ny,
            dt: c.time.dt,
            profile,
            difference,
            ratio,
        });
    }
    Ok(out)
}

pub fn convergence_table(levels: &[ConvergenceLevel]) -> String {
    let mut s = String::from("level,nx,ny,dt,difference,ratio\n");
    for (k, l) in levels.iter().enumerate() {
        let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
        let _ = writeln!(
            s,
            "{k},{},{},{},{},{}",
            l.nx,
            l.ny,
            sci(l.dt),
            opt(l.difference),
            opt(l.ratio)
        );
    }
    s
}

/// One line of a deformation history: `F` (2x2 or 3x3, row major) and the
/// growth stretch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryPoint {
    pub f: tensor::Mat3,
    pub theta: f64,
}

pub fn parse_history(text: &str) -> Result<Vec<HistoryPoint>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect();
        let vals =
            vals.map_err(|_| CliError::Usage(format!("history line {}: bad number", i + 1)))?;
        let mut f = tensor::IDENTITY;
        let theta = match vals.len() {
            5 => {
                f[0][0] = vals[0];
                f[0][1] = vals[1];
                f[1][0] = vals[2];
                f[1][1] = vals[3];
                vals[4]
            }
            10 => {
                for k in 0..9 {
                    f[k / 3][k % 3] = vals[k];
                }
                vals[9]
            }
            n => {
                return Err(CliError::Usage(format!(
                    "history line {}: expected 5 or 10 numbers, got {n}",
                    i + 1
                )))
            }
        };
        out.push(HistoryPoint { f, theta });
    }
    Ok(out)
}

/// Energy, stress and finite-difference consistency errors along a
/// deformation history at frozen growth.
pub fn material_test(cfg: &SimulationConfig, history: &[HistoryPoint]) -> Result<String> {
    cfg.material.validate()?;
    let mat = cfg.material;
    let h = StructureTensors::for_mode(cfg.mesh.mode, &mat);
    let d = cfg.growth_dimension();
    let mut s = String::from("step,theta,psi");
    for i in 1..=3 {
        for j in 1..=3 {
            let _ = write!(s, ",P{i}{j}");
        }
    }
    s.push_str(",stress_fd_error,tangent_fd_error\n");
    let eps = 1e-6;
    for (k, p) in history.iter().enumerate() {
        let kin = Kinematics::new(p.f, p.theta, d)?;
        let psi = free_energy(&kin, &h, &mat)?;
        let stress = pk1_stress(&kin, &h, &mat)?;
        let tangent = material_tangent(&kin, &h, &mat, &tensor::ZERO)?;
        let mut fd_p = tensor::ZERO;
        let mut fd_a = [[0.0; 9]; 9];
        for q in 0..9 {
            let (i, j) = (q / 3, q % 3);
            let shifted = |sign: f64| -> Result<(f64, tensor::Mat3)> {
                let mut f = p.f;
                f[i][j] += sign * eps;
                let k = Kinematics::new(f, p.theta, d)?;
                Ok((free_energy(&k, &h, &mat)?, pk1_stress(&k, &h, &mat)?))
            };
            let (wp, pp) = shifted(1.0)?;
            let (wm, pm) = shifted(-1.0)?;
            fd_p[i][j] = (wp - wm) / (2.0 * eps);
            for r in 0..9 {
                fd_a[r][q] = (pp[r / 3][r % 3] - pm[r / 3][r % 3]) / (2.0 * eps);
            }
        }
        let mut dp = fd_p;
        tensor::axpy(&mut dp, -1.0, &stress);
        let stress_err = tensor::norm(&dp) / tensor::norm(&stress).max(1e-12);
        let mut da = tangent;
        for (row, fd) in da.iter_mut().zip(&fd_a) {
            for (a, b) in row.iter_mut().zip(fd) {
                *a -= b;
            }
        }
        let tangent_err = tensor::norm4(&da) / tensor::norm4(&tangent).max(1e-12);
        let _ = write!(s, "{k},{},{}", sci(p.theta), sci(psi));
        for row in &stress {
            for v in row {
                let _ = write!(s, ",{}", sci(*v));
            }
        }
        let _ = writeln!(s, ",{},{}", sci(stress_err), sci(tangent_err));
    }
    Ok(s)
}

/// Reads `section.csv` from a run directory and writes `section_plot.dat`
/// (arc length, then `rho_S` at every output time) and a gnuplot script.
pub fn section_plot(run_dir: &Path, out: &Path) -> Result<PathBuf> {
    let (header, rows) = read_csv(&run_dir.join("section.csv"))?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("section.csv has no `{name}` column")))
    };
    let (ct, cs, cr) = (col("time")?, col("s")?, col("rho_S")?);
    let mut times: Vec<f64> = Vec::new();
    let mut arcs: Vec<f64> = Vec::new();
    for r in &rows {
        if times.last() != Some(&r[ct]) {
            times.push(r[ct]);
        }
        if times.len() == 1 {
            arcs.push(r[cs]);
        }
    }
    if arcs.is_empty() || rows.len() != times.len() * arcs.len() {
        return Err(CliError::Usage("section.csv is empty or ragged".into()));
    }
    let mut dat = String::from("# s");
    for t in &times {
        let _ = write!(dat, " t={t}");
    }
    dat.push('\n');
    for (i, s) in arcs.iter().enumerate() {
        let _ = write!(dat, "{}", sci(*s));
        for k in 0..times.len() {
            let _ = write!(dat, " {}", sci(rows[k * arcs.len() + i][cr]));
        }
        dat.push('\n');
    }
    create_dir(out)?;
    let path = out.join("section_plot.dat");
    std::fs::write(&path, dat).map_err(|e| CliError::io(&path, e))?;
    let mut gp = String::from(
        "set xlabel 'distance along A-A (mm)'\nset ylabel 'rho_S (cells/mm^3)'\nset key outside\nplot ",
    );
    let series: Vec<String> = times
        .iter()
        .enumerate()
        .map(|(k, t)| {
            format!(
                "'section_plot.dat' using 1:{} with lines title 't = {t}'",
                k + 2
            )
        })
        .collect();
    gp.push_str(&series.join(", \\\n     "));
    gp.push('\n');
    let script = out.join("section_plot.gp");
    std::fs::write(&script, gp).map_err(|e| CliError::io(&script, e))?;
    Ok(path)
}
