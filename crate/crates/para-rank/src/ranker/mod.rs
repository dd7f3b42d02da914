//! Paragraph scoring and ranking with a trainable dual encoder.
//!
//! A paragraph encoder and a question encoder (separate parameters)
//! produce fixed-width representations; a scoring function turns each
//! pair into a similarity `s`, and `sigmoid(s)` is the paragraph's
//! probability of containing the answer. Ranking multiplies that
//! probability by the retriever's document score. Training minimizes a
//! negative-sampling loss with Adamax.

mod adamax;
mod loss;
mod model;
mod rank;
mod sampling;
mod train;

pub use adamax::Adamax;
pub use loss::nce_loss;
pub use model::{
    paragraph_probability, ModelConfig, ModelGrads, RankerModel, Scorer, ScorerGrads, ScorerKind,
};
pub use rank::{rank_paragraphs, RankedParagraph};
pub use sampling::{sample_negatives, NoiseDistribution, SampleError};
pub use train::{train, EpochStats, TrainError, TrainExample, TrainLog, TrainingConfig};

use thiserror::Error;

use crate::text::{embed_sequence, EmbeddingTable, Token, Vocabulary};

/// Paragraphs are truncated to this many tokens before encoding.
pub const MAX_PARAGRAPH_TOKENS: usize = 300;
/// Questions are truncated to this many tokens before encoding.
pub const MAX_QUESTION_TOKENS: usize = 50;

#[derive(Debug, Error)]
pub enum RankerError {
    #[error(transparent)]
    Encode(#[from] crate::encoder::EncodeError),
    #[error("representation width {found} does not match scorer width {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("negative sample list is empty")]
    EmptyNegatives,
}

/// Borrowed vocabulary and embedding table used to embed token
/// sequences for the encoders. Embeddings stay frozen during training.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingContext<'a> {
    pub vocab: &'a Vocabulary,
    pub table: &'a EmbeddingTable,
}

impl<'a> EmbeddingContext<'a> {
    pub fn new(vocab: &'a Vocabulary, table: &'a EmbeddingTable) -> Self {
        EmbeddingContext { vocab, table }
    }

    pub fn embed_question(&self, tokens: &[Token]) -> Vec<Vec<f64>> {
        let cut = tokens.len().min(MAX_QUESTION_TOKENS);
        embed_sequence(&tokens[..cut], self.vocab, self.table)
    }

    pub fn embed_paragraph(&self, tokens: &[Token]) -> Vec<Vec<f64>> {
        let cut = tokens.len().min(MAX_PARAGRAPH_TOKENS);
        embed_sequence(&tokens[..cut], self.vocab, self.table)
    }
}
