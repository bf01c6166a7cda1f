//! Verification trials, scoring, EER / DET computation and feature dumps.

mod dump;
mod eer;
mod score;
mod trials;

pub use dump::dump_features;
pub use eer::{compute_eer, det_points, eer_from_scores, DetPoint, EerReport};
pub use score::{read_scores, score_trials, write_scores, ScoreSet};
pub use trials::{build_trials, enrollment_split, read_trials, write_trials, Label, SpeakerSplit, Trial};

use std::path::PathBuf;

use crate::backend::BackendError;
use crate::corpus::CorpusError;
use crate::ctdnn::NetError;
use crate::frontend::FrontendError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("scores contain only one class (targets: {n_target}, nontargets: {n_nontarget})")]
    OneClassOnly { n_target: usize, n_nontarget: usize },
    #[error("no d-vector for utterance `{0}`")]
    MissingEmbedding(String),
    #[error("non-finite score for trial with test utterance `{0}`")]
    NonFiniteScore(String),
    #[error("{path} line {line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
