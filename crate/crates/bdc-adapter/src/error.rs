//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. The CLI maps errors onto
//! process exit codes: `1` for usage errors, `2` for data/format errors,
//! `3` for numerical failures.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs} vs {rhs}")]
    DimMismatch {
        op: &'static str,
        lhs: String,
        rhs: String,
    },

    #[error("cannot normalize a zero-norm vector")]
    ZeroNorm,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("need at least {min} observations, got {got}")]
    TooFewObservations { min: usize, got: usize },

    #[error("centered matrix is exactly zero (all observation columns coincide); unit-norm scaling undefined")]
    DegenerateBdc,

    #[error("the dependence measure is defined on unnormalized centered matrices")]
    NormalizedMeasureInput,

    #[error("distance variance is zero (constant sample)")]
    ZeroDistanceVariance,

    #[error("projection out_dim {out_dim} exceeds in_dim {in_dim}")]
    BadProjectionDims { out_dim: usize, in_dim: usize },

    #[error("PCA needs at least {need} fit samples, got {got}")]
    InsufficientFitData { need: usize, got: usize },

    #[error("PCA projection requires fit data")]
    MissingFitData,

    #[error("invalid batch: {0}")]
    InvalidBatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite loss ({value}) at epoch {epoch}, step {step}; lower the learning rate")]
    NonFiniteLoss {
        epoch: usize,
        step: usize,
        value: f64,
    },

    #[error("class {class} has {got} eligible items, need {need}")]
    InsufficientShots {
        class: usize,
        need: usize,
        got: usize,
    },

    #[error("{path}: bad magic at byte {offset}, expected {expected:?}")]
    BadMagic {
        path: String,
        offset: u64,
        expected: &'static str,
    },

    #[error("{path}: unsupported format version {found}, expected {expected}")]
    VersionMismatch {
        path: String,
        found: u32,
        expected: u32,
    },

    #[error("{path}: truncated at byte {offset}, needed {needed} more bytes")]
    Truncated {
        path: String,
        offset: u64,
        needed: u64,
    },

    #[error("{path}: trailing data after byte {offset}")]
    TrailingData { path: String, offset: u64 },

    #[error("{path}: item {index} embedding norm {norm} is not unit (byte {offset})")]
    NormViolation {
        path: String,
        index: usize,
        norm: f64,
        offset: u64,
    },

    #[error("{path}: checksum mismatch, stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch {
        path: String,
        stored: u64,
        computed: u64,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("synthetic spec error: {0}")]
    SynthSpec(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-parsable tag for the CLI's one-line error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimMismatch { .. } => "dim-mismatch",
            Error::ZeroNorm => "zero-norm",
            Error::NonFinite(_) => "non-finite",
            Error::TooFewObservations { .. } => "too-few-observations",
            Error::DegenerateBdc => "degenerate-bdc",
            Error::NormalizedMeasureInput => "normalized-measure-input",
            Error::ZeroDistanceVariance => "zero-distance-variance",
            Error::BadProjectionDims { .. } => "bad-projection-dims",
            Error::InsufficientFitData { .. } => "insufficient-fit-data",
            Error::MissingFitData => "missing-fit-data",
            Error::InvalidBatch(_) => "invalid-batch",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NonFiniteLoss { .. } => "non-finite-loss",
            Error::InsufficientShots { .. } => "insufficient-shots",
            Error::BadMagic { .. } => "bad-magic",
            Error::VersionMismatch { .. } => "version-mismatch",
            Error::Truncated { .. } => "truncated",
            Error::TrailingData { .. } => "trailing-data",
            Error::NormViolation { .. } => "norm-violation",
            Error::ChecksumMismatch { .. } => "checksum-mismatch",
            Error::Manifest(_) => "manifest",
            Error::SynthSpec(_) => "synth-spec",
            Error::Usage(_) => "usage",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Process exit code: 1 usage, 2 data/format, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::NonFiniteLoss { .. } => 3,
            _ => 2,
        }
    }
}
