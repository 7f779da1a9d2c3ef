use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rank deficient block: column {column} has |r_jj| = {value:e}")]
    RankDeficient { column: usize, value: f64 },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("Schur iteration failed to converge after {0} iterations")]
    SchurNoConvergence(usize),

    #[error("eigenvalue iteration failed to converge")]
    EigNoConvergence,

    #[error("degenerate bounding box")]
    DegenerateBox,

    #[error("grid needs at least 2 nodes per axis, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("mesh resolution error: {0}")]
    Resolution(String),

    #[error("point ({0}, {1}) is outside the active mesh")]
    OutsideMesh(f64, f64),

    #[error("empty active mesh")]
    EmptyMesh,

    #[error("boundary edge {edge} carries tag `{tag}` with no boundary condition")]
    UntaggedBoundary { edge: usize, tag: String },

    #[error("zero-area element {0}")]
    ZeroAreaElement(usize),

    #[error("elasticity problem has no clamped degrees of freedom")]
    NoClampedDofs,

    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    #[error("incomplete Cholesky breakdown at row {row} after {retries} shift retries")]
    FactorizationBreakdown { row: usize, retries: usize },

    #[error("meshes do not share a background grid")]
    GridMismatch,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
