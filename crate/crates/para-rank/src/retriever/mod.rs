//! Corpus ingestion and TF-IDF document retrieval.

mod corpus;
mod index;
mod persist;

pub use corpus::{Corpus, DocRecord, Document, IngestError, Paragraph};
pub use index::{IndexError, IndexOptions, Retrieved, TfIdfIndex};
pub use persist::PersistError;
