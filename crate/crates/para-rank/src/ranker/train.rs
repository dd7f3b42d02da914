use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::adamax::Adamax;
use super::loss::nce_loss;
use super::model::RankerModel;
use super::sampling::{sample_negatives, NoiseDistribution, SampleError};
use super::{EmbeddingContext, RankerError};
use crate::encoder::Mode;
use crate::math::l2_norm;
use crate::retriever::Paragraph;
use crate::text::Token;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub k_neg: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub seed: u64,
    pub clip_norm: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            k_neg: 4,
            learning_rate: 0.002,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 10,
            seed: 1,
            clip_norm: 10.0,
        }
    }
}

/// One training item: a question, its normalized answer strings (used to
/// filter negatives), and the paragraph known to contain the answer.
#[derive(Debug, Clone)]
pub struct TrainExample<'c> {
    pub question: Vec<Token>,
    pub answers: Vec<String>,
    pub positive: &'c Paragraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("example {example}: {source}")]
    Sample {
        example: usize,
        #[source]
        source: SampleError,
    },
    #[error(transparent)]
    Ranker(#[from] RankerError),
    #[error("non-finite loss at epoch {epoch}, example {example}")]
    NonFiniteLoss { epoch: usize, example: usize },
}

/// Trains the model in place with Adamax, one example per step:
/// draw `k_neg` negatives, take exact gradients of the sampled
/// negative-sampling objective, clip by global norm, update. Examples are
/// reshuffled every epoch from `config.seed`, so a given seed always
/// produces the same log and the same final parameters.
pub fn train(
    model: &mut RankerModel,
    ctx: &EmbeddingContext,
    dataset: &[TrainExample],
    noise: &NoiseDistribution,
    config: &TrainingConfig,
) -> Result<TrainLog, TrainError> {
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut flat = model.to_flat();
    let mut opt = Adamax::new(
        flat.len(),
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.epsilon,
    );
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..dataset.len()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total_loss = 0.0;
        for &example_idx in &order {
            let example = &dataset[example_idx];
            let negatives = sample_negatives(
                noise,
                example.positive,
                &example.answers,
                config.k_neg,
                &mut rng,
            )
            .map_err(|source| TrainError::Sample {
                example: example_idx,
                source,
            })?;
            let (loss, grads) = nce_loss(
                model,
                ctx,
                &example.question,
                example.positive,
                &negatives,
                Mode::Train,
                &mut rng,
            )?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    example: example_idx,
                });
            }
            total_loss += loss;

            let mut grad_flat = grads.to_flat();
            let norm = l2_norm(&grad_flat);
            if norm > config.clip_norm {
                let scale = config.clip_norm / norm;
                for g in grad_flat.iter_mut() {
                    *g *= scale;
                }
            }
            opt.step(&mut flat, &grad_flat);
            model.read_flat(&flat);
        }
        log.epochs.push(EpochStats {
            epoch,
            mean_loss: total_loss / dataset.len() as f64,
        });
    }
    Ok(log)
}
