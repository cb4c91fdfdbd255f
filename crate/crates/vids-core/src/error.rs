//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any toolkit operation.
#[derive(Debug, Error)]
pub enum Error {
    /// A file name or path component does not follow the naming grammar.
    #[error("malformed name {input:?} at byte {position}: {reason}")]
    MalformedName {
        input: String,
        position: usize,
        reason: String,
    },

    /// A rule identifier outside the closed 21-rule catalog.
    #[error("unknown rule id {0:?}")]
    UnknownRule(String),

    /// The file is not a gzip container (RFC 1952 magic missing).
    #[error("{path}: not a gzip file")]
    NotGzip { path: PathBuf },

    /// Header size or magic bytes do not identify a NIfTI-1 volume.
    #[error("{path}: bad NIfTI-1 magic or header size")]
    BadMagic { path: PathBuf },

    /// The volume uses a datatype code the reader does not support.
    #[error("{path}: unsupported NIfTI datatype code {code}")]
    UnsupportedDatatype { path: PathBuf, code: i16 },

    /// The voxel payload is shorter than the header dimensions require.
    #[error("{path}: truncated voxel data, expected {expected} bytes, got {actual}")]
    TruncatedData {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    /// Two masks that must share a grid have different dimensions.
    #[error("volume dims mismatch: {a:?} vs {b:?}")]
    DimsMismatch { a: (u32, u32, u32), b: (u32, u32, u32) },

    /// Dataset root does not exist.
    #[error("dataset root not found: {0}")]
    RootNotFound(PathBuf),

    /// Dataset root exists but is not a directory.
    #[error("dataset root is not a directory: {0}")]
    RootNotDirectory(PathBuf),

    /// Output directory already holds files.
    #[error("destination not empty: {0}")]
    DestinationNotEmpty(PathBuf),

    /// Fixture or scaffold configuration is unusable.
    #[error("bad fixture config: {0}")]
    BadConfig(String),

    /// Split ratios are non-positive or do not sum to one.
    #[error("bad split ratios: {0}")]
    BadRatios(String),

    /// Subject id list passed to the split generator has duplicates.
    #[error("duplicate subject id {0:?}")]
    DuplicateSubjects(String),

    /// Scorecard does not carry exactly the 22 fixed dimensions.
    #[error("wrong dimension count: {0}")]
    WrongDimensionCount(String),

    /// Scorecard entry names a category outside the fixed six.
    #[error("unknown category {0:?}")]
    UnknownCategory(String),

    /// An aggregate operation received no input.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Export preconditions require the source dataset to validate first.
    #[error("source dataset fails {profile} validation: {detail}")]
    ValidationRequired { profile: String, detail: String },

    /// Training-layout export requires ml/splits.json.
    #[error("ml/splits.json missing or unreadable: {0}")]
    MissingSplits(String),

    /// JSON (de)serialization failure outside the tolerant validator paths.
    #[error("json error at {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    /// Underlying I/O failure.
    #[error("i/o error at {path}: {source}")]
    IoFailure {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
