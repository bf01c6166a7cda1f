//! Utterance embeddings (d-vectors) and the scoring backends: cosine,
//! LDA-projected cosine and two-covariance PLDA.

mod dvector;
mod lda;
mod plda;
mod scorer;

pub use dvector::{
    cosine_score, extract_dvector, length_normalize, mean_vector, read_dvectors, write_dvectors, DVector,
};
pub use lda::{apply_lda, fit_lda, scatter_matrices, LdaTransform, Scatter};
pub use plda::{fit_plda, plda_score, speaker_log_likelihood, PldaFit, PldaModel, PldaScorer};
pub use scorer::{Backend, BackendOptions, ScorerKind};

use std::path::PathBuf;

use crate::ctdnn::NetError;

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("utterance has no frames")]
    EmptyUtterance,
    #[error("zero-length vector")]
    ZeroVector,
    #[error("dimension mismatch: {expected} vs {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("need at least two classes with two vectors each: {0}")]
    TooFewSamples(String),
    #[error("between-class scatter is zero (single effective class)")]
    DegenerateScatter,
    #[error("requested dimension {requested} outside 1..={max}")]
    BadDim { requested: usize, max: usize },
    #[error("covariance is not positive definite after ridge regularization: {0}")]
    SingularCovariance(&'static str),
    #[error("vector `{0}` has no speaker label")]
    MissingLabel(String),
    #[error("d-vector file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
