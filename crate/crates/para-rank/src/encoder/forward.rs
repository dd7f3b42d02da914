use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::params::{BiLstmEncoder, LstmDirectionParams, GATE_F, GATE_G, GATE_I, GATE_O};
use super::EncodeError;
use crate::math::{add_assign, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// One LSTM cell step:
/// `i,f,o = sigmoid(Wx + Uh + b)`, `g = tanh(Wx + Uh + b)`,
/// `c = f∘c_prev + i∘g`, `h = o∘tanh(c)`.
pub fn lstm_cell_forward(
    params: &LstmDirectionParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), EncodeError> {
    if x.len() != params.input_dim {
        return Err(EncodeError::DimensionMismatch {
            expected: params.input_dim,
            found: x.len(),
        });
    }
    if h_prev.len() != params.hidden_dim || c_prev.len() != params.hidden_dim {
        return Err(EncodeError::DimensionMismatch {
            expected: params.hidden_dim,
            found: h_prev.len().max(c_prev.len()),
        });
    }
    let step = cell_step(params, x, h_prev, c_prev);
    Ok((step.h, step.c))
}

pub(crate) struct CellStep {
    pub gates: [Vec<f64>; 4],
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn cell_step(
    params: &LstmDirectionParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> CellStep {
    let h_dim = params.hidden_dim;
    let mut pre: [Vec<f64>; 4] = std::array::from_fn(|gate| {
        let mut a = params.w[gate].matvec(x);
        add_assign(&mut a, &params.u[gate].matvec(h_prev));
        add_assign(&mut a, &params.b[gate]);
        a
    });
    for gate in [GATE_I, GATE_F, GATE_O] {
        for v in pre[gate].iter_mut() {
            *v = sigmoid(*v);
        }
    }
    for v in pre[GATE_G].iter_mut() {
        *v = v.tanh();
    }
    let mut c = vec![0.0; h_dim];
    for k in 0..h_dim {
        c[k] = pre[GATE_F][k] * c_prev[k] + pre[GATE_I][k] * pre[GATE_G][k];
    }
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let mut h = vec![0.0; h_dim];
    for k in 0..h_dim {
        h[k] = pre[GATE_O][k] * tanh_c[k];
    }
    CellStep {
        gates: pre,
        c,
        tanh_c,
        h,
    }
}

/// Per-position activations of one direction, indexed by sequence
/// position regardless of processing order.
#[derive(Debug, Clone)]
pub(crate) struct DirectionTrace {
    pub gates: Vec<[Vec<f64>; 4]>,
    pub cells: Vec<Vec<f64>>,
    pub tanh_cells: Vec<Vec<f64>>,
    pub hiddens: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub(crate) struct LayerTrace {
    /// Post-dropout inputs the layer consumed, per position.
    pub inputs: Vec<Vec<f64>>,
    /// Inverted-dropout mask that produced `inputs` (all ones in Infer
    /// mode); one mask shared by every time step.
    pub mask: Vec<f64>,
    pub fwd: DirectionTrace,
    pub bwd: DirectionTrace,
}

/// Everything the backward pass needs to reproduce the forward
/// computation exactly: per-layer, per-direction, per-step activations
/// plus the dropout masks.
#[derive(Debug, Clone)]
pub struct GradientTape {
    pub(crate) layers: Vec<LayerTrace>,
    pub(crate) seq_len: usize,
    pub(crate) layer_dims: Vec<(usize, usize)>,
    repr: Vec<f64>,
}

impl GradientTape {
    /// The representation produced by the forward pass that recorded this
    /// tape.
    pub fn repr(&self) -> &[f64] {
        &self.repr
    }
}

impl BiLstmEncoder {
    /// Encodes an embedded sequence into its 2×hidden representation:
    /// forward state at the last position concatenated with backward
    /// state at position zero. Infer mode is deterministic; train mode
    /// draws one inverted-dropout mask per layer input from `rng`.
    pub fn encode<R: Rng>(
        &self,
        embedded: &[Vec<f64>],
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Vec<f64>, GradientTape), EncodeError> {
        if embedded.is_empty() {
            return Err(EncodeError::EmptySequence);
        }
        if embedded[0].len() != self.embedding_dim() {
            return Err(EncodeError::DimensionMismatch {
                expected: self.embedding_dim(),
                found: embedded[0].len(),
            });
        }
        let seq_len = embedded.len();
        let mut current: Vec<Vec<f64>> = embedded.to_vec();
        let mut layers = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let width = layer.forward.input_dim;
            let mask = draw_mask(width, self.dropout, mode, rng);
            let inputs: Vec<Vec<f64>> = current
                .iter()
                .map(|x| x.iter().zip(mask.iter()).map(|(v, m)| v * m).collect())
                .collect();
            let fwd = run_direction(&layer.forward, &inputs, true);
            let bwd = run_direction(&layer.backward, &inputs, false);
            current = (0..seq_len)
                .map(|pos| {
                    let mut out = fwd.hiddens[pos].clone();
                    out.extend_from_slice(&bwd.hiddens[pos]);
                    out
                })
                .collect();
            layers.push(LayerTrace {
                inputs,
                mask,
                fwd,
                bwd,
            });
        }
        let top = layers.last().expect("at least one layer");
        let mut repr = top.fwd.hiddens[seq_len - 1].clone();
        repr.extend_from_slice(&top.bwd.hiddens[0]);
        let tape = GradientTape {
            layer_dims: self
                .layers
                .iter()
                .map(|l| (l.forward.input_dim, l.forward.hidden_dim))
                .collect(),
            layers,
            seq_len,
            repr: repr.clone(),
        };
        Ok((repr, tape))
    }

    /// Deterministic encoding without dropout.
    pub fn encode_infer(&self, embedded: &[Vec<f64>]) -> Result<(Vec<f64>, GradientTape), EncodeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        self.encode(embedded, Mode::Infer, &mut rng)
    }
}

fn draw_mask<R: Rng>(width: usize, dropout: f64, mode: Mode, rng: &mut R) -> Vec<f64> {
    match mode {
        Mode::Infer => vec![1.0; width],
        Mode::Train if dropout == 0.0 => vec![1.0; width],
        Mode::Train => {
            let keep_scale = 1.0 / (1.0 - dropout);
            (0..width)
                .map(|_| {
                    if rng.gen::<f64>() < dropout {
                        0.0
                    } else {
                        keep_scale
                    }
                })
                .collect()
        }
    }
}

fn run_direction(
    params: &LstmDirectionParams,
    inputs: &[Vec<f64>],
    forward: bool,
) -> DirectionTrace {
    let seq_len = inputs.len();
    let h_dim = params.hidden_dim;
    let empty = || vec![0.0; h_dim];
    let mut trace = DirectionTrace {
        gates: vec![std::array::from_fn(|_| Vec::new()); seq_len],
        cells: vec![Vec::new(); seq_len],
        tanh_cells: vec![Vec::new(); seq_len],
        hiddens: vec![Vec::new(); seq_len],
    };
    let mut h = empty();
    let mut c = empty();
    let positions: Vec<usize> = if forward {
        (0..seq_len).collect()
    } else {
        (0..seq_len).rev().collect()
    };
    for &pos in &positions {
        let step = cell_step(params, &inputs[pos], &h, &c);
        h = step.h.clone();
        c = step.c.clone();
        trace.gates[pos] = step.gates;
        trace.cells[pos] = step.c;
        trace.tanh_cells[pos] = step.tanh_c;
        trace.hiddens[pos] = step.h;
    }
    trace
}
