use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is too small to normalize")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("embedding contains a non-finite value at coordinate {index}")]
    NonFinite { index: usize },

    #[error("embedding is not unit-norm (norm {norm})")]
    NotUnitNorm { norm: f64 },

    #[error("empty embedding")]
    EmptyEmbedding,

    #[error("video has no frames")]
    EmptyVideo,

    #[error("template {template_id} has no resolvable media")]
    EmptyTemplate { template_id: String },

    #[error("records disagree on {field}: {first} vs {other}")]
    MixedTemplate {
        field: &'static str,
        first: String,
        other: String,
    },

    #[error("media {media_id} has no feature vector")]
    MissingFeature { media_id: String },

    #[error("unknown template {0}")]
    UnknownTemplate(String),

    #[error("negative set is empty")]
    EmptyNegatives,

    #[error("positive set is empty")]
    EmptyPositives,

    #[error("solver did not converge after {iterations} epochs (violation {violation:e} > tolerance {tolerance:e})")]
    NonConvergence {
        iterations: usize,
        violation: f64,
        tolerance: f64,
    },

    #[error("score list is empty")]
    EmptyScores,

    #[error("probe {0} has no mated gallery template")]
    MissingMate(String),

    #[error("no non-mated probes; open-set metrics are undefined")]
    NoNonMatedProbes,

    #[error("metric keys differ between splits: {0}")]
    KeyMismatch(String),

    #[error("bad magic bytes {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("file truncated at byte offset {offset}")]
    Truncated { offset: u64 },

    #[error("duplicate media id {0}")]
    DuplicateMediaId(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed metadata at line {line}: {message}")]
    Metadata { line: u64, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimMismatch {
            context: context.into(),
            expected,
            found,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Tags the error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
