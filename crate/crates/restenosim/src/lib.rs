//! Configuration, file formats, output writers and the command-line driver
//! for the restenosis simulator built on [`restenosim_core`].
//!
//! - [`config`]: `section.key = value` configuration with defaults.
//! - [`mesh_io`]: plain-text mesh files.
//! - [`scenario`]: mesh, initial fields and model from a configuration.
//! - [`output`]: VTK snapshots, probe and section CSV, Matrix Market.
//! - [`driver`]: the commands behind the `restenosim` binary.

pub mod cli;
pub mod config;
pub mod driver;
pub mod error;
pub mod mesh_io;
pub mod output;
pub mod scenario;

pub use config::SimulationConfig;
pub use error::{CliError, Result};
