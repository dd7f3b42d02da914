use super::model::{paragraph_probability, RankerModel};
use super::{EmbeddingContext, RankerError};
use crate::retriever::Paragraph;
use crate::text::Token;

/// A candidate paragraph with its ranker probability, its source
/// document's retrieval score, and the combined score used for ordering.
#[derive(Debug, Clone)]
pub struct RankedParagraph<'a> {
    pub paragraph: &'a Paragraph,
    pub ranker_prob: f64,
    pub doc_score: f64,
    pub combined: f64,
}

/// Scores every candidate once (the question is encoded once), combines
/// `p(P|Q)` with the document score by multiplication, and returns the
/// top `m` in descending combined order. Ties prefer the higher document
/// score, then the lower `(doc_id, para_index)`.
pub fn rank_paragraphs<'a>(
    model: &RankerModel,
    ctx: &EmbeddingContext,
    question: &[Token],
    candidates: &[(&'a Paragraph, f64)],
    m: usize,
) -> Result<Vec<RankedParagraph<'a>>, RankerError> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let (q_repr, _) = model.encoder_q.encode_infer(&ctx.embed_question(question))?;
    let mut ranked = Vec::with_capacity(candidates.len());
    for &(paragraph, doc_score) in candidates {
        let (p_repr, _) = model
            .encoder_p
            .encode_infer(&ctx.embed_paragraph(&paragraph.tokens))?;
        let s = model.score(&p_repr, &q_repr)?;
        let ranker_prob = paragraph_probability(s);
        ranked.push(RankedParagraph {
            paragraph,
            ranker_prob,
            doc_score,
            combined: ranker_prob * doc_score,
        });
    }
    sort_ranked(&mut ranked);
    ranked.truncate(m);
    Ok(ranked)
}

pub(crate) fn sort_ranked(ranked: &mut [RankedParagraph<'_>]) {
    ranked.sort_by(|a, b| {
        b.combined
            .total_cmp(&a.combined)
            .then_with(|| b.doc_score.total_cmp(&a.doc_score))
            .then_with(|| {
                (&a.paragraph.doc_id, a.paragraph.para_index)
                    .cmp(&(&b.paragraph.doc_id, b.paragraph.para_index))
            })
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranker::{ModelConfig, Scorer, ScorerKind};
    use crate::retriever::{Corpus, DocRecord};
    use crate::text::{load_embeddings, tokenize, Vocabulary};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Cursor;

    fn fixture(num_paras: usize, seed: u64) -> (Corpus, Vocabulary, crate::text::EmbeddingTable) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = ["red", "blue", "green", "spark", "stone", "river", "cloud"];
        let records = (0..num_paras)
            .map(|i| {
                let text: Vec<&str> = (0..6)
                    .map(|_| words[rng.gen_range(0..words.len())])
                    .collect();
                DocRecord {
                    id: format!("d{i:03}"),
                    title: String::new(),
                    paragraphs: vec![text.join(" ")],
                }
            })
            .collect();
        let corpus = Corpus::from_records(records).unwrap();
        let mut all_tokens = Vec::new();
        for p in corpus.paragraphs() {
            all_tokens.extend(p.tokens.iter().cloned());
        }
        let vocab = Vocabulary::from_tokens(&all_tokens);
        let mut emb_lines = String::new();
        for w in words {
            let v: Vec<String> = (0..4).map(|_| format!("{:.4}", rng.gen_range(-0.5..0.5))).collect();
            emb_lines.push_str(&format!("{w} {}\n", v.join(" ")));
        }
        let table = load_embeddings(Cursor::new(emb_lines), &vocab, 4).unwrap();
        (corpus, vocab, table)
    }

    fn model(seed: u64, kind: ScorerKind) -> RankerModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RankerModel::init(
            &ModelConfig {
                embedding_dim: 4,
                hidden_dim: 3,
                num_layers: 1,
                dropout: 0.0,
                scorer: kind,
                mlp_hidden: 4,
            },
            &mut rng,
        )
    }

    #[test]
    fn no_truncation_returns_all_sorted() {
        let (corpus, vocab, table) = fixture(8, 1);
        let ctx = EmbeddingContext::new(&vocab, &table);
        let m = model(2, ScorerKind::Dot);
        let candidates: Vec<(&Paragraph, f64)> = corpus
            .paragraphs()
            .enumerate()
            .map(|(i, p)| (p, 0.1 + 0.1 * (i % 5) as f64))
            .collect();
        let q = tokenize("red river");
        let ranked = rank_paragraphs(&m, &ctx, &q, &candidates, 100).unwrap();
        assert_eq!(ranked.len(), 8);
        for pair in ranked.windows(2) {
            assert!(pair[0].combined >= pair[1].combined);
        }
    }

    #[test]
    fn equal_probabilities_rank_by_doc_score() {
        let (corpus, vocab, table) = fixture(2, 3);
        let ctx = EmbeddingContext::new(&vocab, &table);
        // Zero encoders: every paragraph gets probability 0.5.
        let mut m = model(4, ScorerKind::Dot);
        m.encoder_p.visit_mut(&mut |s| s.iter_mut().for_each(|v| *v = 0.0));
        m.encoder_q.visit_mut(&mut |s| s.iter_mut().for_each(|v| *v = 0.0));
        let paras: Vec<&Paragraph> = corpus.paragraphs().collect();
        let candidates = vec![(paras[0], 0.5), (paras[1], 0.9)];
        let q = tokenize("anything");
        let ranked = rank_paragraphs(&m, &ctx, &q, &candidates, 2).unwrap();
        assert_eq!(ranked[0].doc_score, 0.9);
        assert!((ranked[0].ranker_prob - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_candidates_yield_empty_list() {
        let (_, vocab, table) = fixture(1, 5);
        let ctx = EmbeddingContext::new(&vocab, &table);
        let m = model(6, ScorerKind::Dot);
        let ranked = rank_paragraphs(&m, &ctx, &tokenize("q"), &[], 5).unwrap();
        assert!(ranked.is_empty());
    }

    #[test]
    fn matches_brute_force_sort_for_random_inputs() {
        let (corpus, vocab, table) = fixture(30, 7);
        let ctx = EmbeddingContext::new(&vocab, &table);
        let m = model(8, ScorerKind::Dot);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let candidates: Vec<(&Paragraph, f64)> = corpus
            .paragraphs()
            .map(|p| (p, rng.gen_range(0.0..1.0)))
            .collect();
        let q = tokenize("spark stone cloud");
        let ranked = rank_paragraphs(&m, &ctx, &q, &candidates, 10).unwrap();

        // Oracle: score everything through the public pieces, full sort,
        // take the prefix.
        let (q_repr, _) = m.encoder_q.encode_infer(&ctx.embed_question(&q)).unwrap();
        let mut oracle: Vec<(f64, f64, (&str, usize))> = candidates
            .iter()
            .map(|&(p, ds)| {
                let (p_repr, _) = m.encoder_p.encode_infer(&ctx.embed_paragraph(&p.tokens)).unwrap();
                let prob = paragraph_probability(m.score(&p_repr, &q_repr).unwrap());
                (prob * ds, ds, (p.doc_id.as_str(), p.para_index))
            })
            .collect();
        oracle.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then_with(|| b.1.total_cmp(&a.1))
                .then_with(|| a.2.cmp(&b.2))
        });
        assert_eq!(ranked.len(), 10);
        for (r, o) in ranked.iter().zip(oracle.iter()) {
            assert_eq!((r.paragraph.doc_id.as_str(), r.paragraph.para_index), o.2);
            assert_eq!(r.combined.to_bits(), o.0.to_bits());
        }
    }

    #[test]
    fn bilinear_identity_ranks_exactly_like_dot() {
        let (corpus, vocab, table) = fixture(12, 11);
        let ctx = EmbeddingContext::new(&vocab, &table);
        let dot_model = model(12, ScorerKind::Dot);
        let mut bilinear = dot_model.clone();
        let dim = dot_model.repr_dim();
        let mut eye = crate::math::Matrix::zeros(dim, dim);
        for i in 0..dim {
            eye.set(i, i, 1.0);
        }
        bilinear.scorer = Scorer::Bilinear { w: eye };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let candidates: Vec<(&Paragraph, f64)> = corpus
            .paragraphs()
            .map(|p| (p, rng.gen_range(0.1..1.0)))
            .collect();
        let q = tokenize("green cloud river");
        let a = rank_paragraphs(&dot_model, &ctx, &q, &candidates, 12).unwrap();
        let b = rank_paragraphs(&bilinear, &ctx, &q, &candidates, 12).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(
                (x.paragraph.doc_id.as_str(), x.paragraph.para_index),
                (y.paragraph.doc_id.as_str(), y.paragraph.para_index)
            );
        }
    }

    #[test]
    fn equal_doc_scores_rank_by_raw_similarity() {
        // With identical document scores the order reduces to descending
        // s, so any strictly increasing transform of s leaves it alone.
        let (corpus, vocab, table) = fixture(12, 21);
        let ctx = EmbeddingContext::new(&vocab, &table);
        let m = model(22, ScorerKind::Dot);
        let candidates: Vec<(&Paragraph, f64)> =
            corpus.paragraphs().map(|p| (p, 0.7)).collect();
        let q = tokenize("red spark blue");
        let ranked = rank_paragraphs(&m, &ctx, &q, &candidates, 12).unwrap();
        let (q_repr, _) = m.encoder_q.encode_infer(&ctx.embed_question(&q)).unwrap();
        let mut by_s: Vec<(f64, (&str, usize))> = candidates
            .iter()
            .map(|&(p, _)| {
                let (p_repr, _) =
                    m.encoder_p.encode_infer(&ctx.embed_paragraph(&p.tokens)).unwrap();
                (
                    m.score(&p_repr, &q_repr).unwrap(),
                    (p.doc_id.as_str(), p.para_index),
                )
            })
            .collect();
        by_s.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        for (r, (_, id)) in ranked.iter().zip(by_s.iter()) {
            assert_eq!((r.paragraph.doc_id.as_str(), r.paragraph.para_index), *id);
        }
    }

    #[test]
    fn doc_score_scaling_preserves_order() {
        let (corpus, vocab, table) = fixture(10, 15);
        let ctx = EmbeddingContext::new(&vocab, &table);
        let m = model(16, ScorerKind::Dot);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let base: Vec<(&Paragraph, f64)> = corpus
            .paragraphs()
            .map(|p| (p, rng.gen_range(0.1..1.0)))
            .collect();
        let q = tokenize("stone");
        let order = |cands: &[(&Paragraph, f64)]| {
            rank_paragraphs(&m, &ctx, &q, cands, 10)
                .unwrap()
                .iter()
                .map(|r| (r.paragraph.doc_id.clone(), r.paragraph.para_index))
                .collect::<Vec<_>>()
        };
        let reference = order(&base);
        for scale in [0.25, 2.0] {
            let scaled: Vec<(&Paragraph, f64)> =
                base.iter().map(|&(p, s)| (p, s * scale)).collect();
            assert_eq!(order(&scaled), reference);
        }
    }
}
