use std::collections::HashMap;

use super::{Reader, ReaderAnswer};
use crate::retriever::{Paragraph, TfIdfIndex};
use crate::text::{detokenize, Token};

/// How far (in tokens) around a span question-term evidence is collected.
const CONTEXT_WINDOW: usize = 10;
/// Per-token span-length penalty; breaks the tie toward short spans.
const LENGTH_PENALTY: f64 = 0.01;
/// Weight of a question token that falls inside the candidate span
/// itself. Kept deliberately small: a span that merely repeats the
/// question is rarely the answer, but it must stay positive so a
/// single-token paragraph matching the question can still be returned.
const IN_SPAN_WEIGHT: f64 = 0.1;

/// Where the reader's idf weights come from.
#[derive(Debug, Clone)]
enum IdfWeights<'i> {
    Index(&'i TfIdfIndex),
    Fixed {
        map: HashMap<String, f64>,
        default: f64,
    },
}

impl IdfWeights<'_> {
    fn of(&self, token: &str) -> f64 {
        match self {
            IdfWeights::Index(index) => index.unigram_idf(token),
            IdfWeights::Fixed { map, default } => map.get(token).copied().unwrap_or(*default),
        }
    }
}

/// Deterministic lexical span scorer. Every span of length <= `max_span`
/// is scored as the sum, over unique question content tokens, of
/// `idf(t) * w(t)` minus `0.01 * span_length`, where
///
/// - an occurrence inside the span contributes a flat `w = 0.1`,
/// - an occurrence outside but within 10 tokens of the span contributes
///   `w = 1/(1 + d)` with `d` the distance to the farthest span
///   endpoint (so a span cannot improve by stretching toward evidence),
/// - a span with no novel content token (every token is a question word
///   or punctuation) takes only the in-span contributions: restating
///   the question is not answering it.
///
/// The best span wins, ties to the earliest; `None` when no span scores
/// above zero.
#[derive(Debug, Clone)]
pub struct LexicalReader<'i> {
    idf: IdfWeights<'i>,
    max_span: usize,
}

impl<'i> LexicalReader<'i> {
    /// Weights question terms by the retrieval index's unigram idf so
    /// that reader scores are roughly comparable across paragraphs.
    pub fn from_index(index: &'i TfIdfIndex, max_span: usize) -> Self {
        LexicalReader {
            idf: IdfWeights::Index(index),
            max_span,
        }
    }

    /// Direct construction with explicit idf weights (tests, offline use).
    pub fn with_idf(
        map: HashMap<String, f64>,
        default: f64,
        max_span: usize,
    ) -> LexicalReader<'static> {
        LexicalReader {
            idf: IdfWeights::Fixed { map, default },
            max_span,
        }
    }

    /// Scans all spans of a paragraph and returns the best-scoring one.
    pub fn best_span(&self, paragraph: &[Token], question: &[Token]) -> Option<ReaderAnswer> {
        let content: Vec<&str> = {
            let mut seen = Vec::new();
            for t in question {
                let text = t.as_str();
                if text.chars().any(char::is_alphanumeric) && !seen.contains(&text) {
                    seen.push(text);
                }
            }
            seen
        };
        if content.is_empty() || paragraph.is_empty() {
            return None;
        }
        let idf: Vec<f64> = content.iter().map(|t| self.idf.of(t)).collect();
        // Occurrence positions per question content token, and which
        // paragraph tokens could be novel answer content.
        let mut occurrences: Vec<Vec<usize>> = vec![Vec::new(); content.len()];
        let mut novel_content = vec![false; paragraph.len()];
        for (pos, t) in paragraph.iter().enumerate() {
            if let Some(c) = content.iter().position(|&q| q == t.as_str()) {
                occurrences[c].push(pos);
            } else if t.as_str().chars().any(char::is_alphanumeric) {
                novel_content[pos] = true;
            }
        }

        let mut best: Option<(f64, usize, usize)> = None;
        for start in 0..paragraph.len() {
            let max_end = (start + self.max_span).min(paragraph.len());
            for end in start + 1..=max_end {
                let has_novel = novel_content[start..end].iter().any(|&n| n);
                let score = span_score(&occurrences, &idf, start, end, has_novel);
                let better = match best {
                    None => score > 0.0,
                    Some((b, _, _)) => score > b,
                };
                if better {
                    best = Some((score, start, end));
                }
            }
        }
        best.map(|(score, start, end)| ReaderAnswer {
            text: detokenize(&paragraph[start..end]),
            start,
            end,
            score,
        })
    }
}

fn span_score(
    occurrences: &[Vec<usize>],
    idf: &[f64],
    start: usize,
    end: usize,
    has_novel_content: bool,
) -> f64 {
    let mut score = 0.0;
    for (positions, &weight) in occurrences.iter().zip(idf.iter()) {
        let mut contribution = 0.0f64;
        for &pos in positions {
            let c = if pos >= start && pos < end {
                IN_SPAN_WEIGHT
            } else if !has_novel_content {
                continue;
            } else {
                let near = if pos < start { start - pos } else { pos - end + 1 };
                if near > CONTEXT_WINDOW {
                    continue;
                }
                let far = (pos.max(start) - pos.min(start))
                    .max(pos.max(end - 1) - pos.min(end - 1));
                1.0 / (1.0 + far as f64)
            };
            contribution = contribution.max(c);
        }
        score += weight * contribution;
    }
    score - LENGTH_PENALTY * (end - start) as f64
}

impl Reader for LexicalReader<'_> {
    fn read(
        &self,
        _question_id: &str,
        question: &[Token],
        paragraph: &Paragraph,
    ) -> Option<ReaderAnswer> {
        self.best_span(&paragraph.tokens, question)
    }
}
