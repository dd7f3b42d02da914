//! Answer aggregation: duplicate candidate answers are merged by their
//! normalized text and their combined scores are summed, so an answer
//! supported by several paragraphs can outvote a single stronger one.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Where a candidate answer came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub doc_id: String,
    pub para_index: usize,
}

/// An extracted answer with the three component scores that feed the
/// combined ranking: reader span score (unnormalized, non-negative),
/// ranker paragraph probability in (0,1), and retriever document score
/// in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAnswer {
    pub answer_text: String,
    pub normalized_text: String,
    pub reader_score: f64,
    pub ranker_prob: f64,
    pub doc_score: f64,
    pub provenance: Provenance,
}

impl CandidateAnswer {
    pub fn new(
        answer_text: impl Into<String>,
        reader_score: f64,
        ranker_prob: f64,
        doc_score: f64,
        provenance: Provenance,
    ) -> Self {
        let answer_text = answer_text.into();
        CandidateAnswer {
            normalized_text: normalize_answer(&answer_text),
            answer_text,
            reader_score,
            ranker_prob,
            doc_score,
            provenance,
        }
    }
}

/// Exponents applied to the reader, ranker, and retriever scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for AggregationWeights {
    fn default() -> Self {
        AggregationWeights {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

impl AggregationWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        AggregationWeights { alpha, beta, gamma }
    }
}

/// Lowercases, strips punctuation (any character that is neither
/// alphanumeric nor whitespace), removes the articles "a", "an", "the"
/// as whole tokens, and collapses whitespace.
pub fn normalize_answer(text: &str) -> String {
    let lowered: String = text
        .chars()
        .flat_map(|c| c.to_lowercase())
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect();
    lowered
        .split_whitespace()
        .filter(|t| !matches!(*t, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Normalized whitespace-delimited tokens of a text, for containment
/// checks at token boundaries.
pub fn normalized_tokens(text: &str) -> Vec<String> {
    normalize_answer(text)
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// True when `needle` occurs as a contiguous token run inside `haystack`.
/// An empty needle never matches.
pub fn contains_tokens(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// True when the normalized answer occurs at token boundaries inside the
/// normalized text.
pub fn answer_in_text(text: &str, answer: &str) -> bool {
    contains_tokens(&normalized_tokens(text), &normalized_tokens(answer))
}

/// The combined score `reader^alpha * ranker^beta * doc^gamma`, with
/// `0^0 = 1` so a zero exponent disables its factor entirely. Exponents
/// are applied in log space; a zero score under a positive exponent
/// contributes a zero product.
pub fn candidate_score(c: &CandidateAnswer, w: &AggregationWeights) -> f64 {
    let mut log_total = 0.0;
    for (score, exponent) in [
        (c.reader_score, w.alpha),
        (c.ranker_prob, w.beta),
        (c.doc_score, w.gamma),
    ] {
        if exponent == 0.0 {
            continue;
        }
        if score == 0.0 {
            return 0.0;
        }
        log_total += exponent * score.ln();
    }
    log_total.exp()
}

/// One merged answer group: all candidates sharing a normalized text.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedAnswer {
    pub normalized_text: String,
    pub total_score: f64,
    /// Original surface form and provenance of the highest-scoring
    /// member of the group.
    pub best_answer_text: String,
    pub best_provenance: Provenance,
}

/// Groups candidates by normalized text, sums their combined scores, and
/// orders groups by total score descending. Ties order by the earliest
/// (doc_id, para_index) seen in the group; the reported surface form is
/// the best-scoring member's (earliest provenance on an in-group tie).
pub fn coverage_merge(
    candidates: &[CandidateAnswer],
    w: &AggregationWeights,
) -> Vec<MergedAnswer> {
    struct Group {
        total: f64,
        best_score: f64,
        best_text: String,
        best_prov: Provenance,
        min_prov: Provenance,
    }
    let mut groups: IndexMap<String, Group> = IndexMap::new();
    for c in candidates {
        let score = candidate_score(c, w);
        match groups.get_mut(&c.normalized_text) {
            None => {
                groups.insert(
                    c.normalized_text.clone(),
                    Group {
                        total: score,
                        best_score: score,
                        best_text: c.answer_text.clone(),
                        best_prov: c.provenance.clone(),
                        min_prov: c.provenance.clone(),
                    },
                );
            }
            Some(g) => {
                g.total += score;
                if score > g.best_score
                    || (score == g.best_score && c.provenance < g.best_prov)
                {
                    g.best_score = score;
                    g.best_text = c.answer_text.clone();
                    g.best_prov = c.provenance.clone();
                }
                if c.provenance < g.min_prov {
                    g.min_prov = c.provenance.clone();
                }
            }
        }
    }
    let mut merged: Vec<(Provenance, MergedAnswer)> = groups
        .into_iter()
        .map(|(normalized_text, g)| {
            (
                g.min_prov,
                MergedAnswer {
                    normalized_text,
                    total_score: g.total,
                    best_answer_text: g.best_text,
                    best_provenance: g.best_prov,
                },
            )
        })
        .collect();
    merged.sort_by(|a, b| {
        b.1.total_score
            .total_cmp(&a.1.total_score)
            .then_with(|| a.0.cmp(&b.0))
    });
    merged.into_iter().map(|(_, m)| m).collect()
}

/// Head of [`coverage_merge`]: the winning group's best surface form and
/// the group's summed score. `None` on empty input.
pub fn select_answer(
    candidates: &[CandidateAnswer],
    w: &AggregationWeights,
) -> Option<(String, f64)> {
    coverage_merge(candidates, w)
        .into_iter()
        .next()
        .map(|m| (m.best_answer_text, m.total_score))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov(doc: &str, para: usize) -> Provenance {
        Provenance {
            doc_id: doc.to_string(),
            para_index: para,
        }
    }

    #[test]
    fn normalization_follows_the_squad_convention() {
        assert_eq!(normalize_answer("The Linebacker!"), "linebacker");
        assert_eq!(normalize_answer("a b"), "b");
        assert_eq!(normalize_answer("apple"), "apple");
        assert_eq!(normalize_answer(""), "");
        assert_eq!(normalize_answer("An  Opening--Act"), "opening act");
    }

    #[test]
    fn containment_respects_token_boundaries() {
        assert!(answer_in_text("modern art is fun", "art"));
        assert!(!answer_in_text("the start of it", "art"));
        assert!(answer_in_text("Von Miller, linebacker", "von miller"));
        assert!(!answer_in_text("anything", ""));
    }

    #[test]
    fn zero_exponents_make_every_candidate_score_one() {
        let c = CandidateAnswer::new("x", 0.0, 0.5, 0.0, prov("d", 0));
        let w = AggregationWeights::new(0.0, 0.0, 0.0);
        assert_eq!(candidate_score(&c, &w), 1.0);
    }

    #[test]
    fn unit_weights_multiply_scores() {
        let c = CandidateAnswer::new("x", 2.0, 0.5, 0.5, prov("d", 0));
        let got = candidate_score(&c, &AggregationWeights::default());
        assert!((got - 0.5).abs() < 1e-12);
    }

    #[test]
    fn alpha_only_reduces_to_reader_score() {
        let c = CandidateAnswer::new("x", 1.75, 0.123, 0.456, prov("d", 0));
        let w = AggregationWeights::new(1.0, 0.0, 0.0);
        assert!((candidate_score(&c, &w) - 1.75).abs() < 1e-12);
    }

    #[test]
    fn duplicates_can_outvote_a_single_stronger_candidate() {
        // Scores are already the combined products; use exponent (1,0,0)
        // with the product stored in reader_score to make them literal.
        let w = AggregationWeights::new(1.0, 0.0, 0.0);
        let candidates = vec![
            CandidateAnswer::new("linebacker", 0.3, 0.5, 0.5, prov("d1", 0)),
            CandidateAnswer::new("Linebacker", 0.2, 0.5, 0.5, prov("d2", 0)),
            CandidateAnswer::new("quarterback", 0.4, 0.5, 0.5, prov("d3", 0)),
        ];
        let merged = coverage_merge(&candidates, &w);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].normalized_text, "linebacker");
        assert!((merged[0].total_score - 0.5).abs() < 1e-12);
        assert_eq!(merged[1].normalized_text, "quarterback");
        assert!((merged[1].total_score - 0.4).abs() < 1e-12);
        // The surface form comes from the strongest member.
        assert_eq!(merged[0].best_answer_text, "linebacker");
    }

    #[test]
    fn single_and_empty_inputs() {
        let w = AggregationWeights::default();
        assert!(coverage_merge(&[], &w).is_empty());
        assert_eq!(select_answer(&[], &w), None);
        let c = CandidateAnswer::new("only", 1.0, 0.5, 1.0, prov("d", 3));
        let merged = coverage_merge(std::slice::from_ref(&c), &w);
        assert_eq!(merged.len(), 1);
        assert!((merged[0].total_score - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equal_scores_tie_break_by_earliest_provenance() {
        let w = AggregationWeights::new(1.0, 0.0, 0.0);
        let candidates = vec![
            CandidateAnswer::new("bbb", 0.4, 0.5, 0.5, prov("d2", 1)),
            CandidateAnswer::new("aaa", 0.4, 0.5, 0.5, prov("d1", 0)),
        ];
        let (text, _) = select_answer(&candidates, &w).unwrap();
        assert_eq!(text, "aaa");
    }

    #[test]
    fn repeated_evidence_wins_the_selection() {
        let w = AggregationWeights::default();
        // Each "linebacker" scores below the distinct candidate's 0.63,
        // but their coverage sum (0.6+0.5+0.4)*0.5 = 0.75 wins.
        let candidates = vec![
            CandidateAnswer::new("linebacker", 1.0, 0.6, 0.5, prov("d1", 1)),
            CandidateAnswer::new("linebacker", 1.0, 0.5, 0.5, prov("d2", 0)),
            CandidateAnswer::new("linebacker", 1.0, 0.4, 0.5, prov("d3", 2)),
            CandidateAnswer::new("ore caster", 1.0, 0.7, 0.9, prov("d0", 0)),
        ];
        let (text, score) = select_answer(&candidates, &w).unwrap();
        assert_eq!(text, "linebacker");
        assert!((score - 0.75).abs() < 1e-12);
    }

    #[test]
    fn selection_is_permutation_invariant() {
        let w = AggregationWeights::default();
        let candidates = vec![
            CandidateAnswer::new("north", 1.1, 0.4, 0.8, prov("d2", 1)),
            CandidateAnswer::new("south", 0.9, 0.7, 0.6, prov("d1", 0)),
            CandidateAnswer::new("North!", 0.8, 0.5, 0.7, prov("d3", 2)),
            CandidateAnswer::new("east", 2.0, 0.2, 0.3, prov("d0", 4)),
        ];
        let baseline = select_answer(&candidates, &w).map(|(t, s)| (normalize_answer(&t), s));
        // All 24 permutations select the same normalized answer with the
        // same group total.
        let mut order = [0usize, 1, 2, 3];
        let mut permutations = vec![order];
        // Heap's algorithm, iteratively.
        let mut c = [0usize; 4];
        let mut i = 0;
        while i < 4 {
            if c[i] < i {
                if i % 2 == 0 {
                    order.swap(0, i);
                } else {
                    order.swap(c[i], i);
                }
                permutations.push(order);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        assert_eq!(permutations.len(), 24);
        for perm in permutations {
            let shuffled: Vec<CandidateAnswer> =
                perm.iter().map(|&i| candidates[i].clone()).collect();
            let got = select_answer(&shuffled, &w).map(|(t, s)| (normalize_answer(&t), s));
            assert_eq!(got, baseline);
        }
    }

    #[test]
    fn doc_score_scaling_does_not_change_the_selection() {
        let w = AggregationWeights::new(1.0, 1.0, 2.0);
        let base = vec![
            CandidateAnswer::new("first", 1.2, 0.6, 0.5, prov("d1", 0)),
            CandidateAnswer::new("second", 0.8, 0.7, 0.6, prov("d2", 0)),
            CandidateAnswer::new("first", 0.5, 0.5, 0.55, prov("d3", 0)),
        ];
        let picked = select_answer(&base, &w).unwrap().0;
        for c_scale in [0.01, 0.5, 3.0, 100.0] {
            let scaled: Vec<CandidateAnswer> = base
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    c.doc_score *= c_scale;
                    c
                })
                .collect();
            assert_eq!(select_answer(&scaled, &w).unwrap().0, picked);
        }
    }
}
