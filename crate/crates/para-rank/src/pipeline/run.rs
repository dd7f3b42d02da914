use serde::{Deserialize, Serialize};

use super::eval::{is_exact_match, EvalError, EvalReport, GridPoint, GridSearchReport,
    QuestionRecord, RecallSummary};
use super::{EvalRecord, PipelineConfig, PipelineError};
use crate::aggregator::{
    contains_tokens, normalized_tokens, select_answer, AggregationWeights, CandidateAnswer,
    Provenance,
};
use crate::ranker::{rank_paragraphs, EmbeddingContext, RankedParagraph, RankerModel};
use crate::reader::Reader;
use crate::retriever::{Corpus, Paragraph, TfIdfIndex};
use crate::text::{tokenize, EmbeddingTable, Token, Vocabulary};

/// A fully assembled question-answering system: immutable after
/// construction, so per-question work can fan out across threads.
pub struct Pipeline {
    pub config: PipelineConfig,
    pub corpus: Corpus,
    pub index: TfIdfIndex,
    pub vocab: Vocabulary,
    pub embeddings: EmbeddingTable,
    pub model: RankerModel,
}

/// One row of the top-paragraph trace attached to every answer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub rank: usize,
    pub doc_id: String,
    pub para_index: usize,
    pub ranker_prob: f64,
    pub doc_score: f64,
    pub combined: f64,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AskOutcome {
    Answered {
        answer: String,
        score: f64,
        trace: Vec<TraceEntry>,
    },
    NoAnswer {
        reason: String,
    },
}

impl Pipeline {
    pub fn new(
        config: PipelineConfig,
        corpus: Corpus,
        index: TfIdfIndex,
        vocab: Vocabulary,
        embeddings: EmbeddingTable,
        model: RankerModel,
    ) -> Result<Pipeline, PipelineError> {
        config.validate()?;
        if index.doc_count() != corpus.len() {
            return Err(PipelineError::IndexCorpusMismatch(format!(
                "index has {} documents, corpus has {}",
                index.doc_count(),
                corpus.len()
            )));
        }
        for (i, id) in index.doc_ids().enumerate() {
            if corpus.doc(i).doc_id != id {
                return Err(PipelineError::IndexCorpusMismatch(format!(
                    "document {i} is {:?} in the index but {:?} in the corpus",
                    id,
                    corpus.doc(i).doc_id
                )));
            }
        }
        if embeddings.dim() != model.encoder_p.embedding_dim() {
            return Err(PipelineError::Config(format!(
                "embedding width {} does not match the model's {}",
                embeddings.dim(),
                model.encoder_p.embedding_dim()
            )));
        }
        if embeddings.vocab_size() != vocab.len() {
            return Err(PipelineError::Config(format!(
                "embedding table has {} rows for a vocabulary of {}",
                embeddings.vocab_size(),
                vocab.len()
            )));
        }
        Ok(Pipeline {
            config,
            corpus,
            index,
            vocab,
            embeddings,
            model,
        })
    }

    fn ctx(&self) -> EmbeddingContext<'_> {
        EmbeddingContext::new(&self.vocab, &self.embeddings)
    }

    /// All paragraphs of the top `n_docs` retrieved documents, each
    /// paired with its document's retrieval score.
    pub fn retrieve_candidates(&self, question: &[Token], n_docs: usize) -> Vec<(&Paragraph, f64)> {
        self.index
            .retrieve(question, n_docs)
            .into_iter()
            .flat_map(|hit| {
                self.corpus
                    .doc(hit.doc_index)
                    .paragraphs
                    .iter()
                    .map(move |p| (p, hit.score))
            })
            .collect()
    }

    /// Retrieval plus ranking, truncated to the top `m` paragraphs by
    /// combined score.
    pub fn rank_question(
        &self,
        question: &[Token],
        n_docs: usize,
        m: usize,
    ) -> Result<Vec<RankedParagraph<'_>>, PipelineError> {
        let candidates = self.retrieve_candidates(question, n_docs);
        Ok(rank_paragraphs(
            &self.model,
            &self.ctx(),
            question,
            &candidates,
            m,
        )?)
    }

    /// Full answer path: retrieve, rank, read each of the top paragraphs,
    /// aggregate. The trace records the top five ranked paragraphs.
    pub fn answer(
        &self,
        reader: &dyn Reader,
        question_id: &str,
        question: &str,
    ) -> Result<AskOutcome, PipelineError> {
        let tokens = tokenize(question);
        let retrieved = self.index.retrieve(&tokens, self.config.n_docs);
        if retrieved.is_empty() {
            return Ok(AskOutcome::NoAnswer {
                reason: "no documents matched".to_string(),
            });
        }
        let candidates: Vec<(&Paragraph, f64)> = retrieved
            .into_iter()
            .flat_map(|hit| {
                self.corpus
                    .doc(hit.doc_index)
                    .paragraphs
                    .iter()
                    .map(move |p| (p, hit.score))
            })
            .collect();
        let ranked = rank_paragraphs(
            &self.model,
            &self.ctx(),
            &tokens,
            &candidates,
            self.config.m_paragraphs,
        )?;

        let trace: Vec<TraceEntry> = ranked
            .iter()
            .take(5)
            .enumerate()
            .map(|(i, rp)| TraceEntry {
                rank: i + 1,
                doc_id: rp.paragraph.doc_id.clone(),
                para_index: rp.paragraph.para_index,
                ranker_prob: rp.ranker_prob,
                doc_score: rp.doc_score,
                combined: rp.combined,
                text: rp.paragraph.text.clone(),
            })
            .collect();

        let candidates = self.read_candidates(reader, question_id, &tokens, &ranked);
        match select_answer(&candidates, &self.config.weights) {
            Some((answer, score)) => Ok(AskOutcome::Answered {
                answer,
                score,
                trace,
            }),
            None => Ok(AskOutcome::NoAnswer {
                reason: "no candidate answers".to_string(),
            }),
        }
    }

    fn read_candidates(
        &self,
        reader: &dyn Reader,
        question_id: &str,
        question: &[Token],
        ranked: &[RankedParagraph<'_>],
    ) -> Vec<CandidateAnswer> {
        ranked
            .iter()
            .filter_map(|rp| {
                reader
                    .read(question_id, question, rp.paragraph)
                    .map(|answer| {
                        CandidateAnswer::new(
                            answer.text,
                            answer.score,
                            rp.ranker_prob,
                            rp.doc_score,
                            Provenance {
                                doc_id: rp.paragraph.doc_id.clone(),
                                para_index: rp.paragraph.para_index,
                            },
                        )
                    })
            })
            .collect()
    }

    /// Answer recall at the configured M under both orderings, with
    /// explicit retrieval depth and paragraph budget. A question is a hit
    /// when any of its top-`m` paragraphs contains a gold answer at
    /// normalized token boundaries.
    pub fn recall_at(
        &self,
        items: &[EvalRecord],
        n_docs: usize,
        m: usize,
    ) -> Result<RecallSummary, PipelineError> {
        if items.is_empty() {
            return Err(EvalError::EmptyEvalSet.into());
        }
        let mut hits_combined = 0usize;
        let mut hits_ranker = 0usize;
        for item in items {
            let tokens = tokenize(&item.question);
            let ranked_all = self.rank_question(&tokens, n_docs, usize::MAX)?;
            let gold: Vec<Vec<String>> = item
                .answers
                .iter()
                .map(|a| normalized_tokens(a))
                .filter(|t| !t.is_empty())
                .collect();
            if first_hit_rank(ranked_all.iter().take(m), &gold).is_some() {
                hits_combined += 1;
            }
            let ranker_order = ranker_only_order(&ranked_all);
            if first_hit_rank(ranker_order.iter().take(m).copied(), &gold).is_some() {
                hits_ranker += 1;
            }
        }
        Ok(RecallSummary {
            combined: hits_combined as f64 / items.len() as f64,
            ranker_only: hits_ranker as f64 / items.len() as f64,
        })
    }

    /// Full evaluation: exact match through the reader plus recall@M
    /// under both orderings, with per-question records.
    pub fn evaluate(
        &self,
        reader: &dyn Reader,
        items: &[EvalRecord],
    ) -> Result<EvalReport, PipelineError> {
        if items.is_empty() {
            return Err(EvalError::EmptyEvalSet.into());
        }
        let m = self.config.m_paragraphs;
        let mut per_question = Vec::with_capacity(items.len());
        for item in items {
            let tokens = tokenize(&item.question);
            let ranked_all = self.rank_question(&tokens, self.config.n_docs, usize::MAX)?;
            let top = &ranked_all[..m.min(ranked_all.len())];
            let gold: Vec<Vec<String>> = item
                .answers
                .iter()
                .map(|a| normalized_tokens(a))
                .filter(|t| !t.is_empty())
                .collect();

            let first_hit = first_hit_rank(top.iter(), &gold);
            let ranker_order = ranker_only_order(&ranked_all);
            let first_hit_ranker =
                first_hit_rank(ranker_order.iter().take(m).copied(), &gold);

            let candidates = self.read_candidates(reader, &item.id, &tokens, top);
            let predicted = select_answer(&candidates, &self.config.weights).map(|(text, _)| text);
            let exact = is_exact_match(predicted.as_deref(), &item.answers);
            per_question.push(QuestionRecord {
                id: item.id.clone(),
                gold: item.answers.clone(),
                predicted,
                first_hit_rank: first_hit,
                first_hit_rank_ranker_only: first_hit_ranker,
                exact_match: exact,
            });
        }
        let n = items.len() as f64;
        Ok(EvalReport {
            evaluated: items.len(),
            m_paragraphs: m,
            exact_match: per_question.iter().filter(|q| q.exact_match).count() as f64 / n,
            recall_at_m: per_question.iter().filter(|q| q.first_hit_rank.is_some()).count() as f64
                / n,
            recall_at_m_ranker_only: per_question
                .iter()
                .filter(|q| q.first_hit_rank_ranker_only.is_some())
                .count() as f64
                / n,
            per_question,
        })
    }

    /// Exhaustive (alpha, beta, gamma) search over {0, 0.5, 1, 2}^3 by
    /// exact match on a validation set. Reader outputs are computed once
    /// per question and re-aggregated for every weight combination.
    pub fn grid_search(
        &self,
        reader: &dyn Reader,
        items: &[EvalRecord],
    ) -> Result<GridSearchReport, PipelineError> {
        if items.is_empty() {
            return Err(EvalError::EmptyEvalSet.into());
        }
        let mut cached: Vec<(Vec<CandidateAnswer>, &EvalRecord)> = Vec::with_capacity(items.len());
        for item in items {
            let tokens = tokenize(&item.question);
            let ranked =
                self.rank_question(&tokens, self.config.n_docs, self.config.m_paragraphs)?;
            let candidates = self.read_candidates(reader, &item.id, &tokens, &ranked);
            cached.push((candidates, item));
        }
        let values = [0.0, 0.5, 1.0, 2.0];
        let mut grid = Vec::with_capacity(values.len().pow(3));
        for &alpha in &values {
            for &beta in &values {
                for &gamma in &values {
                    let w = AggregationWeights::new(alpha, beta, gamma);
                    let hits = cached
                        .iter()
                        .filter(|(candidates, item)| {
                            let predicted =
                                select_answer(candidates, &w).map(|(text, _)| text);
                            is_exact_match(predicted.as_deref(), &item.answers)
                        })
                        .count();
                    grid.push(GridPoint {
                        alpha,
                        beta,
                        gamma,
                        exact_match: hits as f64 / items.len() as f64,
                    });
                }
            }
        }
        let best = *grid
            .iter()
            .max_by(|a, b| {
                a.exact_match.total_cmp(&b.exact_match).then_with(|| {
                    (b.alpha, b.beta, b.gamma)
                        .partial_cmp(&(a.alpha, a.beta, a.gamma))
                        .expect("finite weights")
                })
            })
            .expect("non-empty grid");
        Ok(GridSearchReport { best, grid })
    }
}

/// Candidates re-sorted by ranker probability alone (ties: document
/// score, then provenance).
fn ranker_only_order<'a, 'c>(
    ranked: &'a [RankedParagraph<'c>],
) -> Vec<&'a RankedParagraph<'c>> {
    let mut order: Vec<&RankedParagraph> = ranked.iter().collect();
    order.sort_by(|a, b| {
        b.ranker_prob
            .total_cmp(&a.ranker_prob)
            .then_with(|| b.doc_score.total_cmp(&a.doc_score))
            .then_with(|| {
                (&a.paragraph.doc_id, a.paragraph.para_index)
                    .cmp(&(&b.paragraph.doc_id, b.paragraph.para_index))
            })
    });
    order
}

fn first_hit_rank<'a, 'c: 'a, I>(ranked: I, gold: &[Vec<String>]) -> Option<usize>
where
    I: IntoIterator<Item = &'a RankedParagraph<'c>>,
{
    for (i, rp) in ranked.into_iter().enumerate() {
        let para_tokens = normalized_tokens(&rp.paragraph.text);
        if gold.iter().any(|g| contains_tokens(&para_tokens, g)) {
            return Some(i + 1);
        }
    }
    None
}
