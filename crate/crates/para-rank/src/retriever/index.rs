use std::collections::HashMap;

use indexmap::IndexMap;
use thiserror::Error;

use super::Corpus;
use crate::text::Token;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("cannot index an empty corpus")]
    EmptyCorpus,
}

/// Index construction options. `ngram_max` of 2 indexes unigrams and
/// bigrams; `hash_bits > 0` replaces the explicit term vocabulary with
/// murmur-hashed bins (2^bits of them).
#[derive(Debug, Clone, Copy)]
pub struct IndexOptions {
    pub ngram_max: usize,
    pub hash_bits: u32,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            ngram_max: 2,
            hash_bits: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TermSpace {
    Explicit {
        terms: Vec<String>,
        ids: HashMap<String, u32>,
        df: Vec<u64>,
    },
    Hashed {
        bits: u32,
        df: HashMap<u32, u64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DocVector {
    pub doc_id: String,
    /// Normalized term weights in first-appearance order within the
    /// document. Keeping this order fixes the floating-point summation
    /// sequence, which makes retrieval scores reproducible bit for bit
    /// across save/load round trips.
    pub entries: Vec<(u32, f64)>,
}

/// A retrieved document with its cosine score in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Retrieved {
    pub doc_index: usize,
    pub doc_id: String,
    pub score: f64,
}

/// TF-IDF index over documents. Term weights are
/// `(1 + ln(tf)) * ln((1 + n_docs) / (1 + df))` and each document vector
/// is L2-normalized (documents whose every term weight is zero keep the
/// zero vector). Immutable after build; concurrent retrieval is safe.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfIndex {
    pub(crate) space: TermSpace,
    pub(crate) ngram_max: usize,
    pub(crate) docs: Vec<DocVector>,
}

impl TfIdfIndex {
    pub fn build(corpus: &Corpus, options: IndexOptions) -> Result<TfIdfIndex, IndexError> {
        if corpus.is_empty() {
            return Err(IndexError::EmptyCorpus);
        }
        let n_docs = corpus.len() as u64;
        let mut space = if options.hash_bits > 0 {
            TermSpace::Hashed {
                bits: options.hash_bits,
                df: HashMap::new(),
            }
        } else {
            TermSpace::Explicit {
                terms: Vec::new(),
                ids: HashMap::new(),
                df: Vec::new(),
            }
        };

        // First pass: per-document term counts and document frequencies.
        let mut doc_counts: Vec<(String, Vec<(u32, u64)>)> = Vec::with_capacity(corpus.len());
        for doc in corpus.docs() {
            let stream = doc_token_texts(doc);
            let counts = count_terms(&stream, options.ngram_max);
            let mut resolved = Vec::with_capacity(counts.len());
            for (term, count) in counts {
                let id = space_intern(&mut space, &term);
                space_bump_df(&mut space, id);
                resolved.push((id, count));
            }
            doc_counts.push((doc.doc_id.clone(), resolved));
        }

        // Second pass: weight and normalize each document vector.
        let mut docs = Vec::with_capacity(doc_counts.len());
        for (doc_id, counts) in doc_counts {
            let mut entries: Vec<(u32, f64)> = counts
                .into_iter()
                .map(|(id, count)| {
                    let w = (1.0 + (count as f64).ln()) * idf_value(n_docs, space_df(&space, id));
                    (id, w)
                })
                .collect();
            let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, w) in entries.iter_mut() {
                    *w /= norm;
                }
            }
            docs.push(DocVector { doc_id, entries });
        }

        Ok(TfIdfIndex {
            space,
            ngram_max: options.ngram_max,
            docs,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_id(&self, doc_index: usize) -> &str {
        &self.docs[doc_index].doc_id
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.doc_id.as_str())
    }

    pub fn ngram_max(&self) -> usize {
        self.ngram_max
    }

    pub fn hash_bits(&self) -> u32 {
        match &self.space {
            TermSpace::Explicit { .. } => 0,
            TermSpace::Hashed { bits, .. } => *bits,
        }
    }

    /// IDF of a single token under this index's weighting; unseen tokens
    /// get the df = 0 value. Used by the lexical reader to weight question
    /// terms comparably across paragraphs.
    pub fn unigram_idf(&self, token: &str) -> f64 {
        let n = self.docs.len() as u64;
        let df = match &self.space {
            TermSpace::Explicit { ids, df, .. } => ids
                .get(token)
                .map(|&id| df[id as usize])
                .unwrap_or(0),
            TermSpace::Hashed { bits, df } => {
                let bin = hash_term(token, *bits);
                df.get(&bin).copied().unwrap_or(0)
            }
        };
        idf_value(n, df)
    }

    /// Top-`n` documents by cosine similarity to the question, descending.
    /// Ties break toward earlier ingestion order; zero-score documents are
    /// excluded, so an all-OOV question yields an empty list.
    pub fn retrieve(&self, question: &[Token], n: usize) -> Vec<Retrieved> {
        let query = self.query_vector(question);
        if query.norm == 0.0 {
            return Vec::new();
        }
        let mut scored: Vec<(usize, f64)> = Vec::new();
        for (doc_index, doc) in self.docs.iter().enumerate() {
            let mut acc = 0.0;
            for (id, w) in &doc.entries {
                if let Some(qw) = query.weights.get(id) {
                    acc += w * qw;
                }
            }
            let score = (acc / query.norm).clamp(0.0, 1.0);
            if score > 0.0 {
                scored.push((doc_index, score));
            }
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(n);
        scored
            .into_iter()
            .map(|(doc_index, score)| Retrieved {
                doc_index,
                doc_id: self.docs[doc_index].doc_id.clone(),
                score,
            })
            .collect()
    }

    fn query_vector(&self, question: &[Token]) -> QueryVector {
        let texts: Vec<&str> = question.iter().map(|t| t.as_str()).collect();
        let counts = count_terms(&texts, self.ngram_max);
        let n = self.docs.len() as u64;
        let mut weights = HashMap::new();
        let mut sum_sq = 0.0;
        for (term, count) in counts {
            // Terms outside the indexed vocabulary are dropped: they can
            // never contribute to a dot product.
            let id = match &self.space {
                TermSpace::Explicit { ids, .. } => match ids.get(&term) {
                    Some(&id) => id,
                    None => continue,
                },
                TermSpace::Hashed { bits, df } => {
                    let bin = hash_term(&term, *bits);
                    if !df.contains_key(&bin) {
                        continue;
                    }
                    bin
                }
            };
            let w = (1.0 + (count as f64).ln()) * idf_value(n, space_df(&self.space, id));
            sum_sq += w * w;
            weights.insert(id, w);
        }
        QueryVector {
            weights,
            norm: sum_sq.sqrt(),
        }
    }
}

struct QueryVector {
    weights: HashMap<u32, f64>,
    norm: f64,
}

pub(crate) fn idf_value(n_docs: u64, df: u64) -> f64 {
    ((1 + n_docs) as f64 / (1 + df) as f64).ln()
}

fn doc_token_texts(doc: &super::Document) -> Vec<&str> {
    doc.paragraphs
        .iter()
        .flat_map(|p| p.tokens.iter())
        .map(|t| t.as_str())
        .collect()
}

/// Unique term counts in first-appearance order. The emission order at
/// position `t` is: unigram `t`, then the bigram ending at `t`.
fn count_terms(tokens: &[&str], ngram_max: usize) -> IndexMap<String, u64> {
    let mut counts: IndexMap<String, u64> = IndexMap::new();
    for t in 0..tokens.len() {
        *counts.entry(tokens[t].to_string()).or_insert(0) += 1;
        if ngram_max >= 2 && t > 0 {
            let bigram = format!("{} {}", tokens[t - 1], tokens[t]);
            *counts.entry(bigram).or_insert(0) += 1;
        }
    }
    counts
}

fn space_intern(space: &mut TermSpace, term: &str) -> u32 {
    match space {
        TermSpace::Explicit { terms, ids, df } => {
            if let Some(&id) = ids.get(term) {
                return id;
            }
            let id = terms.len() as u32;
            terms.push(term.to_string());
            ids.insert(term.to_string(), id);
            df.push(0);
            id
        }
        TermSpace::Hashed { bits, df } => {
            let bin = hash_term(term, *bits);
            df.entry(bin).or_insert(0);
            bin
        }
    }
}

fn space_bump_df(space: &mut TermSpace, id: u32) {
    match space {
        TermSpace::Explicit { df, .. } => df[id as usize] += 1,
        TermSpace::Hashed { df, .. } => *df.get_mut(&id).expect("bin interned") += 1,
    }
}

fn space_df(space: &TermSpace, id: u32) -> u64 {
    match space {
        TermSpace::Explicit { df, .. } => df[id as usize],
        TermSpace::Hashed { df, .. } => df.get(&id).copied().unwrap_or(0),
    }
}

fn hash_term(term: &str, bits: u32) -> u32 {
    murmur3_32(term.as_bytes(), 0) & ((1u32 << bits) - 1)
}

fn murmur3_32(data: &[u8], seed: u32) -> u32 {
    const C1: u32 = 0xcc9e_2d51;
    const C2: u32 = 0x1b87_3593;
    let mut h = seed;
    let mut chunks = data.chunks_exact(4);
    for chunk in &mut chunks {
        let mut k = u32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        k = k.wrapping_mul(C1).rotate_left(15).wrapping_mul(C2);
        h ^= k;
        h = h.rotate_left(13).wrapping_mul(5).wrapping_add(0xe654_6b64);
    }
    let tail = chunks.remainder();
    if !tail.is_empty() {
        let mut k = 0u32;
        for (i, &b) in tail.iter().enumerate() {
            k ^= u32::from(b) << (8 * i);
        }
        k = k.wrapping_mul(C1).rotate_left(15).wrapping_mul(C2);
        h ^= k;
    }
    h ^= data.len() as u32;
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^ (h >> 16)
}
