use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Training line: `{"question": ..., "answers": [...], "positive":
/// {"doc_id": ..., "para_index": ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainRecord {
    pub question: String,
    pub answers: Vec<String>,
    pub positive: PositiveRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositiveRef {
    pub doc_id: String,
    pub para_index: usize,
}

/// Evaluation line: `{"id": ..., "question": ..., "answers": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub question: String,
    pub answers: Vec<String>,
}

#[derive(Debug, Error)]
pub enum QaError {
    #[error("qa line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("qa read failed: {0}")]
    Io(#[from] std::io::Error),
}

pub fn load_train_records<R: BufRead>(source: R) -> Result<Vec<TrainRecord>, QaError> {
    load_jsonl(source)
}

pub fn load_eval_records<R: BufRead>(source: R) -> Result<Vec<EvalRecord>, QaError> {
    load_jsonl(source)
}

fn load_jsonl<R: BufRead, T: serde::de::DeserializeOwned>(source: R) -> Result<Vec<T>, QaError> {
    let mut out = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| QaError::Json {
            line: idx + 1,
            source,
        })?;
        out.push(record);
    }
    Ok(out)
}
