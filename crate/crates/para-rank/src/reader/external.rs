use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Reader, ReaderAnswer};
use crate::retriever::Paragraph;
use crate::text::Token;

/// One line of the external-reader exchange format: a separately built
/// reader's best answer for a (question, paragraph) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalRecord {
    pub question_id: String,
    pub doc_id: String,
    pub para_index: usize,
    pub answer: String,
    pub score: f64,
}

#[derive(Debug, Error)]
pub enum ExternalAnswersError {
    #[error("answers line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("answers line {line}: negative score {score}")]
    NegativeScore { line: usize, score: f64 },
    #[error("answers read failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Precomputed answers keyed by (question_id, doc_id, para_index); lets
/// an external neural reader replace the lexical baseline without
/// linking against it.
#[derive(Debug, Clone, Default)]
pub struct ExternalAnswers {
    by_key: HashMap<(String, String, usize), (String, f64)>,
}

impl ExternalAnswers {
    pub fn load<R: BufRead>(source: R) -> Result<ExternalAnswers, ExternalAnswersError> {
        let mut by_key = HashMap::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ExternalRecord =
                serde_json::from_str(&line).map_err(|source| ExternalAnswersError::Json {
                    line: idx + 1,
                    source,
                })?;
            if record.score < 0.0 {
                return Err(ExternalAnswersError::NegativeScore {
                    line: idx + 1,
                    score: record.score,
                });
            }
            by_key.insert(
                (record.question_id, record.doc_id, record.para_index),
                (record.answer, record.score),
            );
        }
        Ok(ExternalAnswers { by_key })
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }
}

impl Reader for ExternalAnswers {
    fn read(
        &self,
        question_id: &str,
        _question: &[Token],
        paragraph: &Paragraph,
    ) -> Option<ReaderAnswer> {
        let key = (
            question_id.to_string(),
            paragraph.doc_id.clone(),
            paragraph.para_index,
        );
        self.by_key.get(&key).map(|(answer, score)| ReaderAnswer {
            text: answer.clone(),
            start: 0,
            end: 0,
            score: *score,
        })
    }
}
