//! Tokenization, vocabulary management, and pretrained embedding lookup.

mod embeddings;
mod tokenize;
mod vocab;

pub use embeddings::{load_embeddings, EmbeddingError, EmbeddingTable};
pub use tokenize::{detokenize, tokenize, Token};
pub use vocab::{Vocabulary, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN};

/// Looks up embedding rows for a token sequence. Unknown tokens map to the
/// UNK row; the output always has one vector per input token.
pub fn embed_sequence(
    tokens: &[Token],
    vocab: &Vocabulary,
    table: &EmbeddingTable,
) -> Vec<Vec<f64>> {
    tokens
        .iter()
        .map(|t| table.row(vocab.id(t.as_str())).to_vec())
        .collect()
}
