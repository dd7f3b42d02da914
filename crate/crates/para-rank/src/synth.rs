//! Seeded synthetic corpora: a marker-matching ranking benchmark and a
//! planted-answer corpus for end-to-end smoke runs. Everything here is
//! deterministic in the seed.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::pipeline::{EvalRecord, PositiveRef, TrainRecord};
use crate::retriever::{Corpus, DocRecord};
use crate::text::{tokenize, EmbeddingTable, Token, Vocabulary};

/// Layout of the ranking benchmark: every question is a fresh
/// combination of words from a shared content vocabulary, and its
/// positive paragraph carries those words as a contiguous phrase at its
/// head (followed by the answer token) plus a couple at its tail. Other
/// paragraphs draw random words from the same vocabulary, so retrieval
/// returns a full slate of documents, every paragraph is lexically
/// plausible, and only the ranker can tell which paragraph matches the
/// whole question. Held-out questions are new combinations of seen
/// words, which is what the dual encoder must generalize to.
#[derive(Debug, Clone)]
pub struct MarkerBenchmarkConfig {
    pub docs: usize,
    pub paras_per_doc: usize,
    pub train_questions: usize,
    pub test_questions: usize,
    pub embedding_dim: usize,
    /// Content words each question shares with its positive paragraph.
    pub words_per_question: usize,
    /// Size of the shared content vocabulary.
    pub content_vocab: usize,
    pub seed: u64,
}

impl Default for MarkerBenchmarkConfig {
    fn default() -> Self {
        MarkerBenchmarkConfig {
            docs: 40,
            paras_per_doc: 5,
            train_questions: 100,
            test_questions: 50,
            embedding_dim: 32,
            words_per_question: 5,
            content_vocab: 30,
            seed: 13,
        }
    }
}

pub struct MarkerBenchmark {
    pub corpus: Corpus,
    pub vocab: Vocabulary,
    pub table: EmbeddingTable,
    pub train: Vec<TrainRecord>,
    pub test: Vec<EvalRecord>,
}

pub fn marker_benchmark(cfg: &MarkerBenchmarkConfig) -> MarkerBenchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let content: Vec<String> = (0..cfg.content_vocab).map(|i| format!("word{i:02}")).collect();
    let fillers: Vec<String> = (0..30).map(|i| format!("filler{i:02}")).collect();
    let topics = cfg.train_questions + cfg.test_questions;
    let total_paras = cfg.docs * cfg.paras_per_doc;
    assert!(
        topics <= total_paras,
        "need at least one paragraph per topic"
    );

    let mut slots: Vec<usize> = (0..total_paras).collect();
    slots.shuffle(&mut rng);
    let mut topic_of_slot: Vec<Option<usize>> = vec![None; total_paras];
    for (topic, &slot) in slots.iter().take(topics).enumerate() {
        topic_of_slot[slot] = Some(topic);
    }

    // Distinct content-word combinations, one per topic.
    let mut topic_words: Vec<Vec<String>> = Vec::with_capacity(topics);
    for _ in 0..topics {
        let mut picks: Vec<usize> = (0..content.len()).collect();
        picks.shuffle(&mut rng);
        topic_words.push(
            picks[..cfg.words_per_question]
                .iter()
                .map(|&i| content[i].clone())
                .collect(),
        );
    }

    let mut records = Vec::with_capacity(cfg.docs);
    for d in 0..cfg.docs {
        let mut paragraphs = Vec::with_capacity(cfg.paras_per_doc);
        for p in 0..cfg.paras_per_doc {
            let slot = d * cfg.paras_per_doc + p;
            let tokens: Vec<String> = if let Some(topic) = topic_of_slot[slot] {
                // The question's words verbatim, then the answer. Keeping
                // the paragraph close to its question makes the cheapest
                // fit a generic question/paragraph similarity map rather
                // than a per-pair alignment, which is what lets held-out
                // questions rank well.
                let mut tokens: Vec<String> = topic_words[topic].clone();
                tokens.push(format!("ans{topic}"));
                tokens
            } else {
                let mut tokens: Vec<String> = Vec::new();
                for _ in 0..cfg.words_per_question {
                    tokens.push(content[rng.gen_range(0..content.len())].clone());
                }
                for _ in 0..2 {
                    tokens.push(fillers[rng.gen_range(0..fillers.len())].clone());
                }
                tokens.shuffle(&mut rng);
                tokens
            };
            paragraphs.push(tokens.join(" "));
        }
        records.push(DocRecord {
            id: format!("doc{d:03}"),
            title: format!("synthetic document {d}"),
            paragraphs,
        });
    }
    let corpus = Corpus::from_records(records).expect("synthetic corpus is well-formed");

    let mut train = Vec::with_capacity(cfg.train_questions);
    let mut test = Vec::with_capacity(cfg.test_questions);
    for (topic, &slot) in slots.iter().take(topics).enumerate() {
        let doc_id = format!("doc{:03}", slot / cfg.paras_per_doc);
        let para_index = slot % cfg.paras_per_doc;
        let question = topic_words[topic].join(" ");
        let answers = vec![format!("ans{topic}")];
        if topic < cfg.train_questions {
            train.push(TrainRecord {
                question,
                answers,
                positive: PositiveRef { doc_id, para_index },
            });
        } else {
            test.push(EvalRecord {
                id: format!("q{topic}"),
                question,
                answers,
            });
        }
    }

    let mut tokens: Vec<Token> = corpus.paragraphs().flat_map(|p| p.tokens.clone()).collect();
    for r in &train {
        tokens.extend(tokenize(&r.question));
    }
    for r in &test {
        tokens.extend(tokenize(&r.question));
    }
    let vocab = Vocabulary::from_tokens(&tokens);
    let table = random_embeddings(&vocab, cfg.embedding_dim, &mut rng);

    MarkerBenchmark {
        corpus,
        vocab,
        table,
        train,
        test,
    }
}

/// Random embedding rows in (-0.5, 0.5) for every non-PAD token.
pub fn random_embeddings<R: Rng>(vocab: &Vocabulary, dim: usize, rng: &mut R) -> EmbeddingTable {
    let mut table = EmbeddingTable::zeros(vocab.len(), dim);
    for id in 1..vocab.len() as u32 {
        for v in table.row_mut(id) {
            *v = rng.gen_range(-0.5..0.5);
        }
    }
    table
}

/// A corpus where each of the first `n_questions` documents plants
/// "the capital of NAME is VALUE" among filler paragraphs, plus
/// distractor documents sharing the filler vocabulary.
pub struct PlantedCorpus {
    pub records: Vec<DocRecord>,
    pub questions: Vec<PlantedQuestion>,
}

pub struct PlantedQuestion {
    pub id: String,
    pub question: String,
    pub answer: String,
    pub doc_id: String,
    /// Paragraph index of the capital sentence within its document.
    pub para_index: usize,
}

pub fn planted_capitals(n_docs: usize, n_questions: usize, seed: u64) -> PlantedCorpus {
    assert!(n_questions <= n_docs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let filler_sentences = [
        "merchants travel the river roads each season",
        "grain and timber move through the markets",
        "the province is known for quiet villages",
        "storm winds arrive late in the year",
        "old walls circle the trading square",
    ];
    let mut records = Vec::with_capacity(n_docs);
    let mut questions = Vec::with_capacity(n_questions);
    for i in 0..n_docs {
        let doc_id = format!("geo{i:03}");
        if i < n_questions {
            let name = format!("vorland{i}");
            let capital = format!("qirstad{i}");
            let lead = filler_sentences[rng.gen_range(0..filler_sentences.len())];
            let tail = filler_sentences[rng.gen_range(0..filler_sentences.len())];
            let paragraphs = vec![
                format!("the province of {name} lies beyond the river . {lead} ."),
                format!("the capital of {name} is {capital} . travelers praise its markets ."),
                format!("{tail} . few maps show every road of {name} ."),
            ];
            questions.push(PlantedQuestion {
                id: format!("q{i:03}"),
                question: format!("what is the capital of {name} ?"),
                answer: capital,
                doc_id: doc_id.clone(),
                para_index: 1,
            });
            records.push(DocRecord {
                id: doc_id,
                title: format!("gazetteer entry {i}"),
                paragraphs,
            });
        } else {
            let a = filler_sentences[rng.gen_range(0..filler_sentences.len())];
            let b = filler_sentences[rng.gen_range(0..filler_sentences.len())];
            records.push(DocRecord {
                id: doc_id,
                title: format!("chronicle {i}"),
                paragraphs: vec![
                    format!("{a} . the chronicle of region {i} continues ."),
                    format!("{b} . caravans pass the border post {i} ."),
                ],
            });
        }
    }
    PlantedCorpus { records, questions }
}

impl PlantedCorpus {
    pub fn train_records(&self) -> Vec<TrainRecord> {
        self.questions
            .iter()
            .map(|q| TrainRecord {
                question: q.question.clone(),
                answers: vec![q.answer.clone()],
                positive: PositiveRef {
                    doc_id: q.doc_id.clone(),
                    para_index: q.para_index,
                },
            })
            .collect()
    }

    pub fn eval_records(&self) -> Vec<EvalRecord> {
        self.questions
            .iter()
            .map(|q| EvalRecord {
                id: q.id.clone(),
                question: q.question.clone(),
                answers: vec![q.answer.clone()],
            })
            .collect()
    }
}

pub fn write_corpus_jsonl<P: AsRef<Path>>(path: P, records: &[DocRecord]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    for r in records {
        writeln!(f, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

pub fn write_train_jsonl<P: AsRef<Path>>(path: P, records: &[TrainRecord]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    for r in records {
        writeln!(f, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

pub fn write_eval_jsonl<P: AsRef<Path>>(path: P, records: &[EvalRecord]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    for r in records {
        writeln!(f, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

/// Writes a word2vec-text embedding file with random vectors for every
/// token of `vocab` except the specials (absent tokens load as zeros).
pub fn write_embeddings<P: AsRef<Path>>(
    path: P,
    vocab: &Vocabulary,
    dim: usize,
    seed: u64,
) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = std::fs::File::create(path)?;
    for token in vocab.tokens().iter().skip(2) {
        let values: Vec<String> = (0..dim)
            .map(|_| format!("{:.6}", rng.gen_range(-0.5..0.5)))
            .collect();
        writeln!(f, "{token} {}", values.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_is_deterministic_and_well_formed() {
        let cfg = MarkerBenchmarkConfig::default();
        let a = marker_benchmark(&cfg);
        let b = marker_benchmark(&cfg);
        assert_eq!(a.corpus.paragraph_count(), 200);
        assert_eq!(a.train.len(), 100);
        assert_eq!(a.test.len(), 50);
        assert_eq!(a.vocab.len(), b.vocab.len());
        let texts_a: Vec<&str> = a.corpus.paragraphs().map(|p| p.text.as_str()).collect();
        let texts_b: Vec<&str> = b.corpus.paragraphs().map(|p| p.text.as_str()).collect();
        assert_eq!(texts_a, texts_b);
        // Each train positive exists and contains its answer.
        for r in &a.train {
            let p = a
                .corpus
                .paragraph(&r.positive.doc_id, r.positive.para_index)
                .expect("positive paragraph exists");
            assert!(crate::aggregator::answer_in_text(&p.text, &r.answers[0]));
        }
    }

    #[test]
    fn planted_corpus_contains_each_answer_once() {
        let planted = planted_capitals(30, 20, 7);
        assert_eq!(planted.records.len(), 30);
        assert_eq!(planted.questions.len(), 20);
        for q in &planted.questions {
            let hits = planted
                .records
                .iter()
                .flat_map(|r| r.paragraphs.iter())
                .filter(|p| crate::aggregator::answer_in_text(p, &q.answer))
                .count();
            assert_eq!(hits, 1, "answer {} must be planted exactly once", q.answer);
        }
    }
}
