use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("pixel ({h:.2}, {v:.2}) back-projects at or above the horizon")]
    Horizon { h: f64, v: f64 },
    #[error("heading class index {0} out of range 0..=9")]
    ClassOutOfRange(u8),
    #[error("invalid bounding box size {width}x{height}")]
    InvalidBox { width: f64, height: f64 },
    #[error("mask has {got} pixels, expected {expected}")]
    MaskSize { expected: usize, got: usize },
    #[error("invalid camera model: {0}")]
    InvalidCamera(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KalmanError {
    #[error("innovation covariance is numerically singular")]
    GainSingular,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignmentError {
    #[error("cost matrix has {got} entries, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("cost entry ({row}, {col}) = {value} is not finite and non-negative")]
    InvalidEntry { row: usize, col: usize, value: f64 },
}

#[derive(Debug, Error)]
pub enum TrackerError {
    #[error("frame {got} does not follow frame {previous}")]
    NonMonotonicFrame { previous: u64, got: u64 },
    #[error(transparent)]
    Kalman(#[from] KalmanError),
}

/// Errors surfaced by the file-driven entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error in {path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Record { path: String, line: usize, message: String },
    #[error("report {path} is missing column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error(transparent)]
    Tracker(#[from] TrackerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// True for errors caused by bad input files rather than runtime failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Record { .. } | Error::MissingColumn { .. })
    }
}
