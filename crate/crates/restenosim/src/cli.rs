//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::SimulationConfig;
use crate::driver;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "restenosim",
    version,
    about = "In-stent restenosis growth simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Configuration file; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// End time (day).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Time step (day).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Mesh file, or `NXxNY` divisions of the generated strip.
    #[arg(long)]
    pub mesh: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupled transport and growth run.
    Run(Common),
    /// Transport on the fixed reference configuration.
    TransportOnly(Common),
    /// Energy, stress and finite-difference errors along a deformation history.
    MaterialTest {
        #[command(flatten)]
        common: Common,
        /// Lines of `F11 F12 F21 F22 theta` or nine entries of F and theta.
        #[arg(long)]
        f_history: PathBuf,
    },
    /// Section profiles on successively halved meshes and time steps.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Plot data for section A-A from a finished run.
    SectionPlot {
        #[command(flatten)]
        common: Common,
        /// Run directory holding `section.csv`; defaults to `--out`.
        #[arg(long)]
        run: Option<PathBuf>,
    },
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(c: &Common) -> Result<SimulationConfig> {
    let mut cfg = match &c.config {
        Some(p) => SimulationConfig::load(p)?,
        None => SimulationConfig::default(),
    };
    if let Some(t) = c.t_end {
        cfg.set("time.t_end", &t.to_string())?;
    }
    if let Some(dt) = c.dt {
        cfg.set("time.dt", &dt.to_string())?;
    }
    if let Some(m) = &c.mesh {
        match m
            .split_once('x')
            .map(|(a, b)| (a.parse::<usize>(), b.parse::<usize>()))
        {
            Some((Ok(nx), Ok(ny))) if !Path::new(m).exists() => {
                cfg.mesh.nx = nx;
                cfg.mesh.ny = ny;
                cfg.mesh.file = None;
            }
            _ => cfg.mesh.file = Some(PathBuf::from(m)),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Caps the assembly thread pool at `RESTENOSIM_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("RESTENOSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "RESTENOSIM_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Executes one command and returns a short report for stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    configure_threads()?;
    match &cli.command {
        Command::Run(c) | Command::TransportOnly(c) => {
            let coupled = matches!(cli.command, Command::Run(_));
            let cfg = resolve_config(c)?;
            let s = driver::run_simulation(&cfg, &c.out, coupled)?;
            Ok(format!(
                "t = {} after {} steps, {} outputs, theta in [{:.6}, {:.6}], {} Newton iterations, {} clamped values, {:.2} s",
                s.final_state.time,
                s.steps,
                s.snapshots,
                s.theta_range.0,
                s.theta_range.1,
                s.newton_iterations,
                s.clamped,
                s.wall_time.as_secs_f64()
            ))
        }
        Command::MaterialTest { common, f_history } => {
            let cfg = resolve_config(common)?;
            let text =
                std::fs::read_to_string(f_history).map_err(|e| CliError::io(f_history, e))?;
            let csv = driver::material_test(&cfg, &driver::parse_history(&text)?)?;
            let path = common.out.join("material_test.csv");
            write(&path, &csv)?;
            Ok(format!("wrote {}", path.display()))
        }
        Command::Convergence { common, levels } => {
            let cfg = resolve_config(common)?;
            let table = driver::convergence_table(&driver::convergence(&cfg, *levels)?);
            write(&common.out.join("convergence.csv"), &table)?;
            Ok(table)
        }
        Command::SectionPlot { common, run } => {
            let dir = run.as_ref().unwrap_or(&common.out);
            let path = driver::section_plot(dir, &common.out)?;
            Ok(format!("wrote {}", path.display()))
        }
    }
}
