use rand::Rng;

use super::model::{ModelGrads, RankerModel};
use super::{EmbeddingContext, RankerError};
use crate::encoder::Mode;
use crate::math::{add_assign, sigmoid, softplus};
use crate::retriever::Paragraph;
use crate::text::Token;

/// Negative-sampling loss for one training step:
///
/// `loss = -log p(P+|Q) - (1/k) Σ log(1 - p(Pk|Q))`
///
/// computed through the numerically stable softplus. The expectation
/// over the noise distribution is estimated by the sample mean of the
/// drawn negatives. Returns the loss and exact gradients of the sampled
/// objective over every trainable parameter; the question is encoded
/// once and its gradient accumulates over all pairs.
pub fn nce_loss<R: Rng>(
    model: &RankerModel,
    ctx: &EmbeddingContext,
    question: &[Token],
    positive: &Paragraph,
    negatives: &[&Paragraph],
    mode: Mode,
    rng: &mut R,
) -> Result<(f64, ModelGrads), RankerError> {
    if negatives.is_empty() {
        return Err(RankerError::EmptyNegatives);
    }
    let (q_repr, q_tape) = model
        .encoder_q
        .encode(&ctx.embed_question(question), mode, rng)?;

    let k = negatives.len() as f64;
    let mut loss = 0.0;
    let mut grads = ModelGrads::zeros_like(model);
    let mut d_q = vec![0.0; q_repr.len()];

    // (paragraph, dL/ds as a function of s) pairs: positive first, then
    // the negatives.
    let mut process = |paragraph: &Paragraph,
                       grads: &mut ModelGrads,
                       d_q: &mut [f64],
                       is_positive: bool|
     -> Result<f64, RankerError> {
        let (p_repr, p_tape) = model
            .encoder_p
            .encode(&ctx.embed_paragraph(&paragraph.tokens), mode, rng)?;
        let s = model.score(&p_repr, &q_repr)?;
        let (term, d_s) = if is_positive {
            // -log sigmoid(s) = softplus(-s); d/ds = sigmoid(s) - 1
            (softplus(-s), sigmoid(s) - 1.0)
        } else {
            // -log(1 - sigmoid(s)) = softplus(s); d/ds = sigmoid(s), averaged
            (softplus(s) / k, sigmoid(s) / k)
        };
        let (d_p, d_q_part, scorer_grads) = model.score_backward(&p_repr, &q_repr, d_s);
        let (enc_grads, _) = model.encoder_p.backward(&p_tape, &d_p)?;
        grads.encoder_p.accumulate(&enc_grads);
        grads.accumulate_scorer(&scorer_grads);
        add_assign(d_q, &d_q_part);
        Ok(term)
    };

    loss += process(positive, &mut grads, &mut d_q, true)?;
    for negative in negatives {
        loss += process(negative, &mut grads, &mut d_q, false)?;
    }

    let (q_grads, _) = model.encoder_q.backward(&q_tape, &d_q)?;
    grads.encoder_q.accumulate(&q_grads);
    Ok((loss, grads))
}
