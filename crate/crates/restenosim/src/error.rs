use std::path::{Path, PathBuf};

use crate::config::ConfigError;
use crate::mesh_io::MeshParseError;

/// Failure of a driver command. [`CliError::exit_code`] maps it to the
/// process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Mesh(#[from] MeshParseError),
    #[error("{0}")]
    Core(#[from] restenosim_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for invalid input, 2 for a failed simulation.
    pub fn exit_code(&self) -> i32 {
        use restenosim_core::Error as E;
        match self {
            CliError::Core(
                E::InvalidMesh(_)
                | E::InvertedElement { .. }
                | E::InvalidParameter { .. }
                | E::DimensionMismatch { .. },
            ) => 1,
            CliError::Core(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
