//! End-to-end orchestration: configuration, persistence, the
//! retrieve → rank → read → aggregate answer path, and evaluation.

mod checkpoint;
mod config;
mod eval;
mod qa;
mod run;

pub use checkpoint::{checkpoint_load, checkpoint_save, Checkpoint, CheckpointError};
pub use config::PipelineConfig;
pub use eval::{
    exact_match_fraction, EvalError, EvalReport, GridPoint, GridSearchReport, QuestionRecord,
    RecallSummary,
};
pub use qa::{load_eval_records, load_train_records, EvalRecord, PositiveRef, QaError, TrainRecord};
pub use run::{AskOutcome, Pipeline, TraceEntry};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] crate::retriever::IngestError),
    #[error(transparent)]
    Index(#[from] crate::retriever::IndexError),
    #[error(transparent)]
    IndexPersist(#[from] crate::retriever::PersistError),
    #[error(transparent)]
    Embedding(#[from] crate::text::EmbeddingError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Qa(#[from] QaError),
    #[error(transparent)]
    Ranker(#[from] crate::ranker::RankerError),
    #[error(transparent)]
    Train(#[from] crate::ranker::TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    ExternalAnswers(#[from] crate::reader::ExternalAnswersError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("index does not match corpus: {0}")]
    IndexCorpusMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// Process exit code: 3 for data/format problems, 4 for runtime
    /// numeric failures. (Usage errors exit 2 before reaching here.)
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Train(crate::ranker::TrainError::NonFiniteLoss { .. }) => 4,
            _ => 3,
        }
    }
}
