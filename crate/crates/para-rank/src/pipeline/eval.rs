use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregator::normalize_answer;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluation set is empty")]
    EmptyEvalSet,
    #[error("predictions missing question ids: {}", ids.join(", "))]
    MissingIds { ids: Vec<String> },
}

/// Per-question evaluation outcome. Hit ranks are 1-based positions of
/// the first answer-bearing paragraph within the top-M list, under the
/// combined (ranker × document) and ranker-only orderings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub gold: Vec<String>,
    pub predicted: Option<String>,
    pub first_hit_rank: Option<usize>,
    pub first_hit_rank_ranker_only: Option<usize>,
    pub exact_match: bool,
}

/// Aggregate metrics: fractions are hits over the evaluated count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub evaluated: usize,
    pub m_paragraphs: usize,
    pub exact_match: f64,
    pub recall_at_m: f64,
    pub recall_at_m_ranker_only: f64,
    pub per_question: Vec<QuestionRecord>,
}

/// Answer recall under both candidate orderings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecallSummary {
    pub combined: f64,
    pub ranker_only: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub exact_match: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSearchReport {
    pub best: GridPoint,
    pub grid: Vec<GridPoint>,
}

/// Fraction of questions whose prediction matches any gold answer after
/// normalization. Predictions and gold align by question id; gold ids
/// without a prediction entry are an error.
pub fn exact_match_fraction(
    predictions: &[(String, Option<String>)],
    gold: &[(String, Vec<String>)],
) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyEvalSet);
    }
    let by_id: HashMap<&str, &Option<String>> =
        predictions.iter().map(|(id, p)| (id.as_str(), p)).collect();
    let mut missing: Vec<String> = gold
        .iter()
        .filter(|(id, _)| !by_id.contains_key(id.as_str()))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        missing.sort();
        return Err(EvalError::MissingIds { ids: missing });
    }
    let hits = gold
        .iter()
        .filter(|(id, answers)| {
            let predicted = by_id[id.as_str()];
            is_exact_match(predicted.as_deref(), answers)
        })
        .count();
    Ok(hits as f64 / gold.len() as f64)
}

pub(crate) fn is_exact_match(predicted: Option<&str>, gold: &[String]) -> bool {
    match predicted {
        None => false,
        Some(p) => {
            let p = normalize_answer(p);
            gold.iter().any(|g| normalize_answer(g) == p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold(pairs: &[(&str, &[&str])]) -> Vec<(String, Vec<String>)> {
        pairs
            .iter()
            .map(|(id, answers)| {
                (
                    id.to_string(),
                    answers.iter().map(|a| a.to_string()).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn normalization_counts_as_a_hit() {
        let predictions = vec![("q1".to_string(), Some("The Linebacker".to_string()))];
        let g = gold(&[("q1", &["linebacker"])]);
        assert_eq!(exact_match_fraction(&predictions, &g).unwrap(), 1.0);
    }

    #[test]
    fn absent_prediction_is_a_miss() {
        let predictions = vec![("q1".to_string(), None)];
        let g = gold(&[("q1", &["anything"])]);
        assert_eq!(exact_match_fraction(&predictions, &g).unwrap(), 0.0);
    }

    #[test]
    fn hit_ratio_is_exact() {
        let predictions = vec![
            ("q1".to_string(), Some("a".to_string())),
            ("q2".to_string(), Some("b".to_string())),
            ("q3".to_string(), Some("wrong".to_string())),
            ("q4".to_string(), Some("d".to_string())),
        ];
        let g = gold(&[("q1", &["a"]), ("q2", &["b"]), ("q3", &["c"]), ("q4", &["d"])]);
        assert_eq!(exact_match_fraction(&predictions, &g).unwrap(), 0.75);
    }

    #[test]
    fn missing_ids_are_listed() {
        let predictions = vec![("q1".to_string(), Some("a".to_string()))];
        let g = gold(&[("q1", &["a"]), ("q3", &["c"]), ("q2", &["b"])]);
        let err = exact_match_fraction(&predictions, &g).unwrap_err();
        assert_eq!(
            err.to_string(),
            "predictions missing question ids: q2, q3"
        );
    }

    #[test]
    fn empty_gold_set_is_an_error() {
        assert!(matches!(
            exact_match_fraction(&[], &[]).unwrap_err(),
            EvalError::EmptyEvalSet
        ));
    }
}
