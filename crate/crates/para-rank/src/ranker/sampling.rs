use rand::Rng;
use thiserror::Error;

use crate::aggregator::{contains_tokens, normalized_tokens};
use crate::retriever::{Corpus, Paragraph};

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("negative pool has only {eligible} eligible paragraphs, need {needed}")]
    InsufficientPool { eligible: usize, needed: usize },
}

/// Uniform noise distribution over a paragraph pool. Normalized token
/// sequences are cached once so answer-containment filtering stays cheap
/// inside the training loop.
#[derive(Debug, Clone)]
pub struct NoiseDistribution<'c> {
    entries: Vec<NoiseEntry<'c>>,
}

#[derive(Debug, Clone)]
struct NoiseEntry<'c> {
    paragraph: &'c Paragraph,
    norm_tokens: Vec<String>,
}

impl<'c> NoiseDistribution<'c> {
    pub fn from_corpus(corpus: &'c Corpus) -> Self {
        Self::from_paragraphs(corpus.paragraphs())
    }

    pub fn from_paragraphs(paragraphs: impl Iterator<Item = &'c Paragraph>) -> Self {
        let entries = paragraphs
            .map(|paragraph| NoiseEntry {
                norm_tokens: normalized_tokens(&paragraph.text),
                paragraph,
            })
            .collect();
        NoiseDistribution { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Draws `k_neg` distinct paragraphs uniformly from the pool, excluding
/// the positive and every paragraph containing any of the (normalized)
/// answer strings at token boundaries.
pub fn sample_negatives<'c, R: Rng>(
    noise: &NoiseDistribution<'c>,
    positive: &Paragraph,
    answers: &[String],
    k_neg: usize,
    rng: &mut R,
) -> Result<Vec<&'c Paragraph>, SampleError> {
    let answer_tokens: Vec<Vec<String>> = answers
        .iter()
        .map(|a| normalized_tokens(a))
        .filter(|t| !t.is_empty())
        .collect();
    let mut eligible: Vec<usize> = Vec::new();
    for (i, entry) in noise.entries.iter().enumerate() {
        let p = entry.paragraph;
        if p.doc_id == positive.doc_id && p.para_index == positive.para_index {
            continue;
        }
        if answer_tokens
            .iter()
            .any(|ans| contains_tokens(&entry.norm_tokens, ans))
        {
            continue;
        }
        eligible.push(i);
    }
    if eligible.len() < k_neg {
        return Err(SampleError::InsufficientPool {
            eligible: eligible.len(),
            needed: k_neg,
        });
    }
    // Partial Fisher-Yates: the first k_neg slots end up a uniform
    // without-replacement sample.
    for slot in 0..k_neg {
        let pick = slot + rng.gen_range(0..eligible.len() - slot);
        eligible.swap(slot, pick);
    }
    Ok(eligible[..k_neg]
        .iter()
        .map(|&i| noise.entries[i].paragraph)
        .collect())
}
