//! Crate-wide error type.
//!
//! Errors fall into three classes that the CLI maps onto exit codes:
//! usage problems (1), data/format problems (2), and numerical or
//! degeneracy problems (3).

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ---- usage ----
    #[error("usage error: {0}")]
    Usage(String),

    // ---- data / format ----
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("payload length mismatch: expected {expected} bytes of data, found {found}")]
    PayloadLength { expected: u64, found: u64 },

    #[error("invalid stored dimensions T={t}, V={v}")]
    InvalidDimensions { t: u64, v: u64 },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("manifest parse error in {path}: {source}")]
    ManifestParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("subject {subject} has no score in the manifest")]
    MissingScore { subject: String },

    #[error("duplicate subject id {id}")]
    DuplicateSubject { id: String },

    #[error("unknown subject id {id}")]
    UnknownSubject { id: String },

    #[error("dimension mismatch in {context}: expected {expected_rows}x{expected_cols}, found {found_rows}x{found_cols}")]
    DimensionMismatch {
        context: String,
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    // ---- numerical / degeneracy ----
    #[error("zero-variance columns at vertices {vertices:?}")]
    ZeroVarianceColumns { vertices: Vec<usize> },

    #[error("SVD failed to converge")]
    SvdFailed,

    #[error("degenerate scores: {context}")]
    DegenerateScores { context: String },

    #[error("degenerate correlation: {context}")]
    DegenerateCorrelation { context: String },

    #[error("empty input: {context}")]
    EmptyInput { context: String },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bandwidth selection failed: every grid value produced an undefined LOO error")]
    BandwidthSelectionFailed,

    #[error("bootstrap resampling exhausted {retries} retries without {min_distinct} distinct subjects")]
    BootstrapRetriesExhausted { retries: usize, min_distinct: usize },

    #[error("distance tensor kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("distance tensor storage mismatch: {context}")]
    StorageMismatch { context: String },
}

impl Error {
    /// Exit code class for the CLI: 1 usage, 2 data/format, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Usage(_) => 1,
            Io { .. }
            | BadMagic { .. }
            | VersionMismatch { .. }
            | PayloadLength { .. }
            | InvalidDimensions { .. }
            | NonFinite { .. }
            | ManifestParse { .. }
            | MissingScore { .. }
            | DuplicateSubject { .. }
            | UnknownSubject { .. }
            | DimensionMismatch { .. } => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
