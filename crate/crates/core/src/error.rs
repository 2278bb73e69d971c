use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {op} got {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: ‖G − G*‖_F = {deviation:e} exceeds tolerance {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("columns are not orthonormal: ‖V*V − I‖_F = {residual:e}")]
    NotOrthonormal { residual: f64 },

    #[error("rank deficient: reduce r (λ_{r} = {lambda_r:e}, λ_1 = {lambda_1:e})")]
    RankDeficient {
        r: usize,
        lambda_r: f64,
        lambda_1: f64,
    },

    #[error("r = {r} out of range 1..={max}")]
    RankOutOfRange { r: usize, max: usize },

    #[error("eigensolver failed to converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("adjoint eigenvalues failed to pair up (gap {gap:e})")]
    AdjointPairing { gap: f64 },

    #[error("zero-norm image: ratio undefined")]
    ZeroNorm,

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("empty gallery")]
    EmptyGallery,

    #[error("inconsistent dimensions: {source_name} is {got:?}, expected {expected:?}")]
    InconsistentDimensions {
        source_name: String,
        got: (usize, usize),
        expected: (usize, usize),
    },

    #[error("relaxation vector has {got} weights for {expected} classes")]
    ClassCountMismatch { got: usize, expected: usize },

    #[error("invalid image: {0}")]
    Image(String),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("invalid model archive: {0}")]
    Archive(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used to map failures onto process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Data,
    Numerical,
    Usage,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotHermitian { .. }
            | Error::NotOrthonormal { .. }
            | Error::RankDeficient { .. }
            | Error::NoConvergence { .. }
            | Error::AdjointPairing { .. }
            | Error::ZeroNorm => ErrorClass::Numerical,
            Error::RankOutOfRange { .. } | Error::InvalidArgument(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
