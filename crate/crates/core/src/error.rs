use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown phoneme `{0}`")]
    UnknownPhoneme(String),

    #[error("duplicate phoneme `{0}`")]
    DuplicatePhoneme(String),

    #[error("missing phoneme `{0}`")]
    MissingPhoneme(String),

    #[error("invalid value `{value}` for feature `{feature}`")]
    FeatureValue { feature: &'static str, value: String },

    #[error("inconsistent features for `{phoneme}`: {msg}")]
    InconsistentFeatures { phoneme: String, msg: String },

    #[error("invalid weights: {0}")]
    Weights(String),

    #[error("degenerate embedding table: {0}")]
    DegenerateEmbedding(String),

    #[error("invalid similarity matrix: {0}")]
    Matrix(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("reference sequence is empty")]
    EmptyReference,

    #[error("pronunciation is empty")]
    EmptyPronunciation,

    #[error("target sequence is empty")]
    EmptyTarget,

    #[error("{frames} frames cannot align a target that needs at least {required}")]
    Infeasible { frames: usize, required: usize },

    #[error("invalid probability matrix: {0}")]
    Probabilities(String),

    #[error("every compatible alignment path has zero probability")]
    ZeroProbability,

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
