use thiserror::Error;

/// Every failure the solvers, diagnostics and I/O layer can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("incompatible fields: {0}")]
    IncompatibleFields(String),

    #[error("non-finite value in field `{field}` at cell {index}")]
    NonFinite { field: String, index: usize },

    #[error("kernel too narrow: scale {scale:e} spans fewer than 2 cells of width {spacing:e}")]
    KernelTooNarrow { scale: f64, spacing: f64 },

    #[error("kernel too wide: half-width {half_width} cells needs fewer than N/2 = {limit}")]
    KernelTooWide { half_width: usize, limit: usize },

    #[error("unstable step: dt = {dt:e} exceeds the stability limit {limit:e}")]
    UnstableStep { dt: f64, limit: f64 },

    #[error("invalid flux: {0}")]
    InvalidFlux(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("blow-up detected at t = {time}: field `{field}` reached {magnitude:e}")]
    BlowUp {
        time: f64,
        field: String,
        magnitude: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("characteristics crossed at x0 = {x0}, t = {time}: oracle invalid past blow-up")]
    CharacteristicsCrossed { x0: f64, time: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("nothing to plot in {0}")]
    NothingToPlot(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code of the CLI: 2 for invalid input, 3 for a diverged
    /// run, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Validation { .. }
            | Error::InvalidParams(_)
            | Error::InvalidLadder(_)
            | Error::InvalidFlux(_)
            | Error::InvalidGrid(_)
            | Error::UnsupportedDimension(_)
            | Error::KernelTooNarrow { .. }
            | Error::KernelTooWide { .. } => 2,
            Error::BlowUp { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
