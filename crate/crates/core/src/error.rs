use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the matching stack.
///
/// Every variant maps to a stable, machine-parsable class string (see
/// [`Error::class`]) and a process exit code used by the command-line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("degenerate faces: {faces:?}")]
    DegenerateFaces { faces: Vec<usize> },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("infeasible sparsity pattern: {kind} {index} has no admissible entry")]
    InfeasiblePattern { kind: &'static str, index: usize },

    #[error("projection failed to reach feasibility (residual {residual:e})")]
    ProjectionFailed { residual: f64 },

    #[error("solver diverged at iteration {iter} (last step {step:e})")]
    Divergence { iter: usize, step: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error(
        "heat kernel signature unavailable for {n} vertices (limit {limit}); use geodesic_sig"
    )]
    HksSizeLimit { n: usize, limit: usize },

    #[error("heat kernel signature unavailable: {0}; use geodesic_sig")]
    HksUnsupported(String),

    #[error("no anchor pairs at outer iteration {iter} (epsilon {epsilon}); try a larger initial epsilon")]
    EmptyAnchorSet { iter: usize, epsilon: f64 },

    #[error("perturbation fragments the mesh: component of {size} vertices (minimum {min})")]
    Fragmented { size: usize, min: usize },

    #[error("index out of range: {0}")]
    BadIndex(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// Stable dotted error class, e.g. `io.not_found`.
    pub fn class(&self) -> &'static str {
        match self {
            Error::NotFound(_) => "io.not_found",
            Error::Io { .. } => "io.error",
            Error::Parse { .. } => "io.parse",
            Error::DegenerateFaces { .. } => "geometry.degenerate_faces",
            Error::InvalidMesh(_) => "geometry.invalid_mesh",
            Error::InvalidInput(_) => "input.invalid",
            Error::DimensionMismatch(_) => "qap.dimension_mismatch",
            Error::InfeasiblePattern { .. } => "qap.infeasible",
            Error::ProjectionFailed { .. } => "numeric.projection",
            Error::Divergence { .. } => "numeric.divergence",
            Error::Eigen(_) => "numeric.eigen",
            Error::HksSizeLimit { .. } => "descriptors.hks_size_limit",
            Error::HksUnsupported(_) => "descriptors.hks_unsupported",
            Error::EmptyAnchorSet { .. } => "anchor.empty",
            Error::Fragmented { .. } => "synth.fragmented",
            Error::BadIndex(_) => "eval.bad_index",
            Error::Config(_) => "config.invalid",
        }
    }

    /// Process exit code: 2 for I/O, 3 for configuration and input, 4 for
    /// numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotFound(_)
            | Error::Io { .. }
            | Error::Parse { .. }
            | Error::DegenerateFaces { .. }
            | Error::InvalidMesh(_) => 2,
            Error::ProjectionFailed { .. }
            | Error::Divergence { .. }
            | Error::Eigen(_)
            | Error::EmptyAnchorSet { .. }
            | Error::InfeasiblePattern { .. }
            | Error::DimensionMismatch(_) => 4,
            _ => 3,
        }
    }
}
