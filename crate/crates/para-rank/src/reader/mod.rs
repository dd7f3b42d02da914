//! Extractive readers: given a paragraph and a question, produce the best
//! answer span with an unnormalized, cross-paragraph-comparable score.
//!
//! The built-in baseline is purely lexical; an externally computed answer
//! file (see [`ExternalAnswers`]) can stand in for a neural reader.

mod external;
mod lexical;

pub use external::{ExternalAnswers, ExternalAnswersError, ExternalRecord};
pub use lexical::LexicalReader;

use crate::retriever::Paragraph;
use crate::text::Token;

/// An extracted span: token offsets are inclusive-start, exclusive-end,
/// and `text` is the space-joined span.
#[derive(Debug, Clone, PartialEq)]
pub struct ReaderAnswer {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub score: f64,
}

/// Behavioral contract for readers: deterministic for fixed inputs, with
/// scores comparable across paragraphs for the same question.
/// `question_id` lets precomputed-answer readers look up their output;
/// self-contained readers ignore it.
pub trait Reader {
    fn read(
        &self,
        question_id: &str,
        question: &[Token],
        paragraph: &Paragraph,
    ) -> Option<ReaderAnswer>;
}
