use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("point cloud has no nx/ny/nz properties")]
    MissingNormals,
    #[error("mesh is not manifold: {0}")]
    NonManifold(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("decimation stopped at {reached} vertices, target {target} unreachable")]
    TargetUnreachable { target: usize, reached: usize },
    #[error("patch condition violated at face {face}: {reason}")]
    PatchConditionViolated { face: usize, reason: String },
    #[error("parameter ({v}, {w}) outside the patch domain")]
    Domain { v: f64, w: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subdivision level {0} exceeds the maximum of 6")]
    LevelTooLarge(usize),
    #[error("valence {0} is not supported (maximum 50)")]
    UnsupportedValence(usize),
    #[error("degenerate triangle {0} in rest mesh")]
    DegenerateTriangle(usize),
    #[error("sample {0} has no cloud point within the support radius")]
    EmptyNeighborhood(usize),
    #[error("all {count} samples lie outside the support radius (max nearest-point distance {max_nearest:.6})")]
    AllSamplesEmpty { count: usize, max_nearest: f64 },
    #[error("optimization diverged at iteration {0}")]
    Diverged(usize),
    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("operator cache: {0}")]
    Cache(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable, machine-parseable name of the error variant.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoError",
            Error::Parse(_) => "ParseError",
            Error::MissingNormals => "MissingNormals",
            Error::NonManifold(_) => "NonManifold",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::TargetUnreachable { .. } => "TargetUnreachable",
            Error::PatchConditionViolated { .. } => "PatchConditionViolated",
            Error::Domain { .. } => "DomainError",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::LevelTooLarge(_) => "LevelTooLarge",
            Error::UnsupportedValence(_) => "UnsupportedValence",
            Error::DegenerateTriangle(_) => "DegenerateTriangle",
            Error::EmptyNeighborhood(_) => "EmptyNeighborhood",
            Error::AllSamplesEmpty { .. } => "AllSamplesEmpty",
            Error::Diverged(_) => "Diverged",
            Error::Frame { source, .. } => source.class(),
            Error::Config(_) => "ConfigError",
            Error::Cache(_) => "CacheError",
        }
    }
}
