use std::io::BufRead;

use thiserror::Error;

use super::{Vocabulary, PAD_ID};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding line {line}: expected {expected} components, found {found}")]
    InconsistentDim {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("embedding line {line}: non-numeric component {value:?}")]
    NonNumeric { line: usize, value: String },
    #[error("embedding line {line}: missing vector components")]
    MissingVector { line: usize },
    #[error("embedding read failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Dense table of pretrained word vectors, one row per vocabulary id.
/// Row 0 (PAD) is always the zero vector; tokens absent from the source
/// stream (including UNK) keep zero rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    /// All-zero table, useful as a neutral fallback.
    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: vec![vec![0.0; dim]; vocab_size],
        }
    }

    pub fn from_rows(vectors: Vec<Vec<f64>>) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        debug_assert!(vectors.iter().all(|v| v.len() == dim));
        EmbeddingTable { dim, vectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.vectors.len()
    }

    pub fn row(&self, id: u32) -> &[f64] {
        &self.vectors[id as usize]
    }

    pub fn row_mut(&mut self, id: u32) -> &mut [f64] {
        &mut self.vectors[id as usize]
    }
}

/// Reads word2vec text format (`word v_1 ... v_d`, one record per line, no
/// header) and copies rows for vocabulary tokens. The dimension is taken
/// from the first line; `default_dim` applies only to an empty stream.
pub fn load_embeddings<R: BufRead>(
    source: R,
    vocab: &Vocabulary,
    default_dim: usize,
) -> Result<EmbeddingTable, EmbeddingError> {
    let mut dim: Option<usize> = None;
    let mut rows: Vec<(u32, Vec<f64>)> = Vec::new();

    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().expect("non-empty line has a first field");
        let mut vector = Vec::with_capacity(dim.unwrap_or(0));
        for value in parts {
            let v: f64 = value.parse().map_err(|_| EmbeddingError::NonNumeric {
                line: lineno,
                value: value.to_string(),
            })?;
            vector.push(v);
        }
        if vector.is_empty() {
            return Err(EmbeddingError::MissingVector { line: lineno });
        }
        match dim {
            None => dim = Some(vector.len()),
            Some(d) if d != vector.len() => {
                return Err(EmbeddingError::InconsistentDim {
                    line: lineno,
                    expected: d,
                    found: vector.len(),
                })
            }
            Some(_) => {}
        }
        if vocab.contains(word) {
            rows.push((vocab.id(word), vector));
        }
    }

    let dim = dim.unwrap_or(default_dim);
    let mut table = EmbeddingTable::zeros(vocab.len(), dim);
    for (id, vector) in rows {
        table.vectors[id as usize] = vector;
    }
    // PAD is zero regardless of what the stream contains.
    table.vectors[PAD_ID as usize] = vec![0.0; dim];
    Ok(table)
}
