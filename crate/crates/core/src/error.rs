//! Crate-wide error type.
//!
//! Variants are grouped by what the caller can do about them: configuration
//! problems are fixable before anything runs, missing inputs point at the
//! filesystem, and the remaining variants describe data that was present but
//! unusable. The CLI maps these groups onto distinct exit codes.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (bad parameter values,
    /// violated invariants between parameters, malformed config files).
    #[error("configuration error: {0}")]
    Config(String),

    /// A required input file or directory does not exist.
    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),

    /// Reading or writing failed below the format layer.
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file existed and was readable but its content is malformed.
    #[error("format error in {}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    /// Array/grid dimensions do not line up with what an operation expects.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// Geometrically degenerate input: collinear correspondences, a singular
    /// homography, an unbounded camera footprint, and the like.
    #[error("degenerate geometry: {0}")]
    Geometry(String),

    /// Label data violating the panoptic contract (unknown class value,
    /// instance id on a stuff pixel, conflicting classes for one id).
    #[error("label error: {0}")]
    Label(String),

    /// The scene or pose handed to the simulator cannot be realized
    /// (scatterer at zero range, camera facing away from the ground).
    #[error("simulation error: {0}")]
    Simulation(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code the CLI uses for this error class:
    /// 2 = configuration, 3 = missing inputs, 4 = unreadable/unwritable data,
    /// 1 = anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::MissingInput(_) => 3,
            Error::Io { .. } | Error::Format { .. } => 4,
            _ => 1,
        }
    }
}
