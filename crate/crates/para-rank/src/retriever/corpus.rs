use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{tokenize, Token};

/// One retrieval unit: a paragraph of a document, tokenized once at
/// ingestion. `(doc_id, para_index)` is unique corpus-wide and
/// `para_index` counts the retained (non-empty) paragraphs of the
/// document from zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub doc_id: String,
    pub para_index: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

#[derive(Debug, Clone)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub paragraphs: Vec<Paragraph>,
}

/// JSON-lines input record: `{"id": ..., "title": ..., "paragraphs": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocRecord {
    pub id: String,
    pub title: String,
    pub paragraphs: Vec<String>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("duplicate doc_id {0}")]
    DuplicateDocId(String),
    #[error("document {doc_id} has no non-empty paragraphs")]
    NoParagraphs { doc_id: String },
    #[error("corpus line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("corpus read failed: {0}")]
    Io(#[from] std::io::Error),
}

/// The retrieval universe: documents in ingestion order, each holding its
/// ordered non-empty paragraphs. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Reads one JSON document record per line. Whitespace-only paragraph
    /// texts are discarded; a document left with none is rejected, as are
    /// duplicate ids.
    pub fn ingest<R: BufRead>(source: R) -> Result<Corpus, IngestError> {
        let mut records = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: DocRecord =
                serde_json::from_str(&line).map_err(|source| IngestError::Json {
                    line: idx + 1,
                    source,
                })?;
            records.push(record);
        }
        Corpus::from_records(records)
    }

    pub fn from_records(records: Vec<DocRecord>) -> Result<Corpus, IngestError> {
        let mut docs = Vec::with_capacity(records.len());
        let mut by_id = HashMap::with_capacity(records.len());
        for record in records {
            if by_id.contains_key(&record.id) {
                return Err(IngestError::DuplicateDocId(record.id));
            }
            let mut paragraphs = Vec::new();
            for text in record.paragraphs {
                if text.trim().is_empty() {
                    continue;
                }
                paragraphs.push(Paragraph {
                    doc_id: record.id.clone(),
                    para_index: paragraphs.len(),
                    tokens: tokenize(&text),
                    text,
                });
            }
            if paragraphs.is_empty() {
                return Err(IngestError::NoParagraphs { doc_id: record.id });
            }
            by_id.insert(record.id.clone(), docs.len());
            docs.push(Document {
                doc_id: record.id,
                title: record.title,
                paragraphs,
            });
        }
        Ok(Corpus { docs, by_id })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn doc(&self, index: usize) -> &Document {
        &self.docs[index]
    }

    pub fn doc_by_id(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn paragraph(&self, doc_id: &str, para_index: usize) -> Option<&Paragraph> {
        self.doc_by_id(doc_id)?.paragraphs.get(para_index)
    }

    /// All paragraphs in (document, paragraph) order.
    pub fn paragraphs(&self) -> impl Iterator<Item = &Paragraph> {
        self.docs.iter().flat_map(|d| d.paragraphs.iter())
    }

    pub fn paragraph_count(&self) -> usize {
        self.docs.iter().map(|d| d.paragraphs.len()).sum()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn record(id: &str, paragraphs: &[&str]) -> DocRecord {
        DocRecord {
            id: id.to_string(),
            title: format!("title of {id}"),
            paragraphs: paragraphs.iter().map(|p| p.to_string()).collect(),
        }
    }

    #[test]
    fn ingest_preserves_order_and_counts() {
        let input = concat!(
            "{\"id\":\"d1\",\"title\":\"t1\",\"paragraphs\":[\"a b\",\"c\",\"d\"]}\n",
            "{\"id\":\"d2\",\"title\":\"t2\",\"paragraphs\":[\"e\",\"f\"]}\n",
        );
        let corpus = Corpus::ingest(Cursor::new(input)).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.paragraph_count(), 5);
        assert_eq!(corpus.doc(0).doc_id, "d1");
        assert_eq!(corpus.doc(1).paragraphs[1].para_index, 1);
        assert_eq!(corpus.paragraph("d1", 0).unwrap().tokens.len(), 2);
    }

    #[test]
    fn duplicate_doc_id_is_rejected_by_name() {
        let records = vec![record("d1", &["x"]), record("d1", &["y"])];
        let err = Corpus::from_records(records).unwrap_err();
        assert_eq!(err.to_string(), "duplicate doc_id d1");
    }

    #[test]
    fn document_with_only_blank_paragraphs_is_rejected() {
        let err = Corpus::from_records(vec![record("d1", &["", "  "])]).unwrap_err();
        assert!(matches!(err, IngestError::NoParagraphs { .. }));
    }

    #[test]
    fn blank_paragraphs_are_dropped_and_indices_renumbered() {
        let corpus = Corpus::from_records(vec![record("d1", &["", "kept one", " ", "kept two"])])
            .unwrap();
        let paras = &corpus.doc(0).paragraphs;
        assert_eq!(paras.len(), 2);
        assert_eq!(paras[0].text, "kept one");
        assert_eq!(paras[1].para_index, 1);
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = Corpus::ingest(Cursor::new("not json\n")).unwrap_err();
        assert!(err.to_string().starts_with("corpus line 1"));
    }
}
