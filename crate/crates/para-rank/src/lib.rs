//! Open-domain question answering with learned paragraph ranking.
//!
//! The pipeline retrieves documents with a TF-IDF index, scores their
//! paragraphs with a trainable Bi-LSTM dual encoder, reads the top
//! paragraphs with a pluggable extractive reader, and aggregates the
//! candidate answers by multiplying reader, ranker, and retriever scores.
//!
//! Modules follow the pipeline stages:
//!
//! - [`text`] — tokenization, vocabulary, pretrained embedding lookup
//! - [`retriever`] — corpus ingestion and TF-IDF document retrieval
//! - [`encoder`] — Bi-LSTM encoders with exact reverse-mode gradients
//! - [`ranker`] — paragraph scoring, negative sampling, Adamax training
//! - [`reader`] — extractive answer spans (lexical baseline included)
//! - [`aggregator`] — duplicate-merging answer selection
//! - [`pipeline`] — end-to-end orchestration, evaluation, persistence
//! - [`synth`] — seeded synthetic corpora for benchmarks and smoke tests

pub mod aggregator;
pub mod encoder;
pub mod math;
pub mod pipeline;
pub mod ranker;
pub mod reader;
pub mod retriever;
pub mod synth;
pub mod text;
