use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RankerError;
use crate::encoder::{BiLstmEncoder, EncoderGrads};
use crate::math::{add_assign, dot, sigmoid, Matrix};

/// Which similarity function compares the two representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Dot,
    Bilinear,
    Mlp,
}

/// Similarity function over (paragraph, question) representations.
///
/// - `Dot`: `s = p · q`
/// - `Bilinear`: `s = pᵀ W q`
/// - `Mlp`: `s = v · tanh(W_h [p; q; p∘q] + b_h) + b`
#[derive(Debug, Clone, PartialEq)]
pub enum Scorer {
    Dot,
    Bilinear {
        w: Matrix,
    },
    Mlp {
        w_h: Matrix,
        b_h: Vec<f64>,
        v: Vec<f64>,
        b: f64,
    },
}

impl Scorer {
    pub fn kind(&self) -> ScorerKind {
        match self {
            Scorer::Dot => ScorerKind::Dot,
            Scorer::Bilinear { .. } => ScorerKind::Bilinear,
            Scorer::Mlp { .. } => ScorerKind::Mlp,
        }
    }

    pub fn init<R: Rng>(kind: ScorerKind, repr_dim: usize, mlp_hidden: usize, rng: &mut R) -> Self {
        let mut rand_matrix = |rows: usize, cols: usize| {
            let scale = 1.0 / (cols as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| rng.gen_range(-scale..scale))
                .collect();
            Matrix::from_vec(rows, cols, data)
        };
        match kind {
            ScorerKind::Dot => Scorer::Dot,
            ScorerKind::Bilinear => Scorer::Bilinear {
                w: rand_matrix(repr_dim, repr_dim),
            },
            ScorerKind::Mlp => {
                let w_h = rand_matrix(mlp_hidden, 3 * repr_dim);
                let scale = 1.0 / (mlp_hidden as f64).sqrt();
                let v = (0..mlp_hidden).map(|_| rng.gen_range(-scale..scale)).collect();
                Scorer::Mlp {
                    w_h,
                    b_h: vec![0.0; mlp_hidden],
                    v,
                    b: 0.0,
                }
            }
        }
    }

    pub fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        match self {
            Scorer::Dot => {}
            Scorer::Bilinear { w } => f(w.data()),
            Scorer::Mlp { w_h, b_h, v, b } => {
                f(w_h.data());
                f(b_h);
                f(v);
                f(std::slice::from_ref(b));
            }
        }
    }

    pub fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        match self {
            Scorer::Dot => {}
            Scorer::Bilinear { w } => f(w.data_mut()),
            Scorer::Mlp { w_h, b_h, v, b } => {
                f(w_h.data_mut());
                f(b_h);
                f(v);
                f(std::slice::from_mut(b));
            }
        }
    }

    fn zeros_like(&self) -> Scorer {
        match self {
            Scorer::Dot => Scorer::Dot,
            Scorer::Bilinear { w } => Scorer::Bilinear {
                w: Matrix::zeros(w.rows(), w.cols()),
            },
            Scorer::Mlp { w_h, b_h, v, .. } => Scorer::Mlp {
                w_h: Matrix::zeros(w_h.rows(), w_h.cols()),
                b_h: vec![0.0; b_h.len()],
                v: vec![0.0; v.len()],
                b: 0.0,
            },
        }
    }
}

/// Gradients for scorer parameters; same shapes as [`Scorer`].
pub type ScorerGrads = Scorer;

/// Hyperparameters for building a fresh model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub dropout: f64,
    pub scorer: ScorerKind,
    pub mlp_hidden: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embedding_dim: 300,
            hidden_dim: 128,
            num_layers: 3,
            dropout: 0.4,
            scorer: ScorerKind::Dot,
            mlp_hidden: 256,
        }
    }
}

/// All trainable parameters: two separate Bi-LSTM stacks (paragraph side
/// and question side) plus the scoring function's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RankerModel {
    pub encoder_p: BiLstmEncoder,
    pub encoder_q: BiLstmEncoder,
    pub scorer: Scorer,
}

impl RankerModel {
    pub fn init<R: Rng>(config: &ModelConfig, rng: &mut R) -> Self {
        let encoder_p = BiLstmEncoder::init(
            config.embedding_dim,
            config.hidden_dim,
            config.num_layers,
            config.dropout,
            rng,
        );
        let encoder_q = BiLstmEncoder::init(
            config.embedding_dim,
            config.hidden_dim,
            config.num_layers,
            config.dropout,
            rng,
        );
        let scorer = Scorer::init(config.scorer, encoder_p.output_dim(), config.mlp_hidden, rng);
        RankerModel {
            encoder_p,
            encoder_q,
            scorer,
        }
    }

    /// Representation width both encoders produce.
    pub fn repr_dim(&self) -> usize {
        self.encoder_p.output_dim()
    }

    pub fn mlp_hidden(&self) -> usize {
        match &self.scorer {
            Scorer::Mlp { b_h, .. } => b_h.len(),
            _ => 0,
        }
    }

    /// Similarity of a paragraph representation and a question
    /// representation under the model's scoring function.
    pub fn score(&self, p_repr: &[f64], q_repr: &[f64]) -> Result<f64, RankerError> {
        let width = self.repr_dim();
        if p_repr.len() != width || q_repr.len() != width {
            return Err(RankerError::WidthMismatch {
                expected: width,
                found: p_repr.len().max(q_repr.len()),
            });
        }
        Ok(match &self.scorer {
            Scorer::Dot => dot(p_repr, q_repr),
            Scorer::Bilinear { w } => dot(p_repr, &w.matvec(q_repr)),
            Scorer::Mlp { w_h, b_h, v, b } => {
                let z = mlp_features(p_repr, q_repr);
                let mut a = w_h.matvec(&z);
                add_assign(&mut a, b_h);
                let t: Vec<f64> = a.iter().map(|x| x.tanh()).collect();
                dot(v, &t) + b
            }
        })
    }

    /// Gradient of `d_s * s(p, q)` with respect to both representations
    /// and the scorer parameters.
    pub fn score_backward(
        &self,
        p_repr: &[f64],
        q_repr: &[f64],
        d_s: f64,
    ) -> (Vec<f64>, Vec<f64>, ScorerGrads) {
        let mut grads = self.scorer.zeros_like();
        match (&self.scorer, &mut grads) {
            (Scorer::Dot, Scorer::Dot) => {
                let d_p: Vec<f64> = q_repr.iter().map(|v| v * d_s).collect();
                let d_q: Vec<f64> = p_repr.iter().map(|v| v * d_s).collect();
                (d_p, d_q, grads)
            }
            (Scorer::Bilinear { w }, Scorer::Bilinear { w: dw }) => {
                let d_p: Vec<f64> = w.matvec(q_repr).iter().map(|v| v * d_s).collect();
                let d_q: Vec<f64> = w.matvec_transpose(p_repr).iter().map(|v| v * d_s).collect();
                let scaled_p: Vec<f64> = p_repr.iter().map(|v| v * d_s).collect();
                dw.add_outer(&scaled_p, q_repr);
                (d_p, d_q, grads)
            }
            (
                Scorer::Mlp { w_h, b_h, v, .. },
                Scorer::Mlp {
                    w_h: dw_h,
                    b_h: db_h,
                    v: dv,
                    b: db,
                },
            ) => {
                let width = p_repr.len();
                let z = mlp_features(p_repr, q_repr);
                let mut a = w_h.matvec(&z);
                add_assign(&mut a, b_h);
                let t: Vec<f64> = a.iter().map(|x| x.tanh()).collect();
                // s = v·t + b
                for (dvj, tj) in dv.iter_mut().zip(t.iter()) {
                    *dvj = d_s * tj;
                }
                *db = d_s;
                let d_a: Vec<f64> = v
                    .iter()
                    .zip(t.iter())
                    .map(|(vj, tj)| d_s * vj * (1.0 - tj * tj))
                    .collect();
                dw_h.add_outer(&d_a, &z);
                add_assign(db_h, &d_a);
                let d_z = w_h.matvec_transpose(&d_a);
                let mut d_p = d_z[..width].to_vec();
                let mut d_q = d_z[width..2 * width].to_vec();
                for j in 0..width {
                    d_p[j] += d_z[2 * width + j] * q_repr[j];
                    d_q[j] += d_z[2 * width + j] * p_repr[j];
                }
                (d_p, d_q, grads)
            }
            _ => unreachable!("grads built from the same scorer"),
        }
    }

    pub fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |s| n += s.len());
        n
    }

    pub fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.encoder_p.visit(f);
        self.encoder_q.visit(f);
        self.scorer.visit(f);
    }

    pub fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.encoder_p.visit_mut(f);
        self.encoder_q.visit_mut(f);
        self.scorer.visit_mut(f);
    }

    pub fn push_flat(&self, out: &mut Vec<f64>) {
        self.visit(&mut |s| out.extend_from_slice(s));
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.push_flat(&mut out);
        out
    }

    pub fn read_flat(&mut self, src: &[f64]) {
        let mut cursor = 0;
        self.visit_mut(&mut |s| {
            s.copy_from_slice(&src[cursor..cursor + s.len()]);
            cursor += s.len();
        });
        debug_assert_eq!(cursor, src.len());
    }
}

/// `p(P|Q) = 1 / (1 + e^{-s})`, strictly increasing and overflow-free for
/// |s| up to 700. The true value is strictly inside (0, 1); in f64 it
/// saturates to exactly 1.0 once s exceeds ~36.7, where the difference
/// from 1 falls below half an ulp.
pub fn paragraph_probability(s: f64) -> f64 {
    sigmoid(s)
}

fn mlp_features(p_repr: &[f64], q_repr: &[f64]) -> Vec<f64> {
    let mut z = Vec::with_capacity(3 * p_repr.len());
    z.extend_from_slice(p_repr);
    z.extend_from_slice(q_repr);
    z.extend(p_repr.iter().zip(q_repr.iter()).map(|(a, b)| a * b));
    z
}

/// Gradients for every trainable parameter, in the model's flatten order
/// (paragraph encoder, question encoder, scorer).
#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub encoder_p: EncoderGrads,
    pub encoder_q: EncoderGrads,
    pub scorer: ScorerGrads,
}

impl ModelGrads {
    pub fn zeros_like(model: &RankerModel) -> Self {
        ModelGrads {
            encoder_p: EncoderGrads::zeros_like(&model.encoder_p),
            encoder_q: EncoderGrads::zeros_like(&model.encoder_q),
            scorer: model.scorer.zeros_like(),
        }
    }

    pub fn accumulate_scorer(&mut self, other: &ScorerGrads) {
        let mut flat = Vec::new();
        other.visit(&mut |s| flat.extend_from_slice(s));
        let mut cursor = 0;
        self.scorer.visit_mut(&mut |s| {
            add_assign(s, &flat[cursor..cursor + s.len()]);
            cursor += s.len();
        });
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.encoder_p.push_flat(&mut out);
        self.encoder_q.push_flat(&mut out);
        self.scorer.visit(&mut |s| out.extend_from_slice(s));
        out
    }
}
