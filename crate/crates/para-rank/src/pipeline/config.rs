use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::aggregator::AggregationWeights;

/// Pipeline-wide settings. `n_docs` documents are retrieved, their
/// paragraphs ranked, and the top `m_paragraphs` read.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub n_docs: usize,
    pub m_paragraphs: usize,
    pub weights: AggregationWeights,
    pub max_span: usize,
    /// Embedding width used when the embedding stream is empty.
    pub embedding_dim: usize,
    pub corpus_path: Option<PathBuf>,
    pub index_path: Option<PathBuf>,
    pub model_path: Option<PathBuf>,
    pub embeddings_path: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_docs: 20,
            m_paragraphs: 200,
            weights: AggregationWeights::default(),
            max_span: 5,
            embedding_dim: 300,
            corpus_path: None,
            index_path: None,
            model_path: None,
            embeddings_path: None,
        }
    }
}

impl PipelineConfig {
    /// Reads a TOML or JSON config file; the format is detected from the
    /// first non-whitespace byte.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<PipelineConfig, PipelineError> {
        let raw = std::fs::read_to_string(&path)?;
        let config: PipelineConfig = if raw.trim_start().starts_with('{') {
            serde_json::from_str(&raw)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.as_ref().display())))?
        } else {
            toml::from_str(&raw)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.as_ref().display())))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.n_docs == 0 {
            return Err(PipelineError::Config("n_docs must be at least 1".into()));
        }
        if self.m_paragraphs == 0 {
            return Err(PipelineError::Config(
                "m_paragraphs must be at least 1".into(),
            ));
        }
        if self.max_span == 0 {
            return Err(PipelineError::Config("max_span must be at least 1".into()));
        }
        for (name, v) in [
            ("alpha", self.weights.alpha),
            ("beta", self.weights.beta),
            ("gamma", self.weights.gamma),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(PipelineError::Config(format!(
                    "{name} must be a non-negative finite number"
                )));
            }
        }
        Ok(())
    }
}
