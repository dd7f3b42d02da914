use super::forward::{DirectionTrace, GradientTape};
use super::params::{BiLstmEncoder, LstmDirectionParams, GATE_F, GATE_G, GATE_I, GATE_O};
use super::EncodeError;
use crate::math::add_assign;

/// Gradient accumulators with the same shape as [`BiLstmEncoder`]'s
/// parameters; flattening order matches the encoder's.
#[derive(Debug, Clone)]
pub struct EncoderGrads {
    pub layers: Vec<LayerGrads>,
}

#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub forward: LstmDirectionParams,
    pub backward: LstmDirectionParams,
}

impl EncoderGrads {
    pub fn zeros_like(encoder: &BiLstmEncoder) -> Self {
        EncoderGrads {
            layers: encoder
                .layers
                .iter()
                .map(|l| LayerGrads {
                    forward: LstmDirectionParams::zeros(
                        l.forward.input_dim,
                        l.forward.hidden_dim,
                    ),
                    backward: LstmDirectionParams::zeros(
                        l.backward.input_dim,
                        l.backward.hidden_dim,
                    ),
                })
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &EncoderGrads) {
        let mut flat = Vec::new();
        other.push_flat(&mut flat);
        let mut cursor = 0;
        self.visit_mut(&mut |dst| {
            add_assign(dst, &flat[cursor..cursor + dst.len()]);
            cursor += dst.len();
        });
    }

    pub fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        for layer in &self.layers {
            layer.forward.visit(f);
            layer.backward.visit(f);
        }
    }

    pub fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        for layer in &mut self.layers {
            layer.forward.visit_mut(f);
            layer.backward.visit_mut(f);
        }
    }

    pub fn push_flat(&self, out: &mut Vec<f64>) {
        self.visit(&mut |s| out.extend_from_slice(s));
    }
}

impl BiLstmEncoder {
    /// Exact reverse-mode gradients of `repr · d_repr` with respect to
    /// every parameter and every input embedding, replayed from the tape
    /// of the matching forward call. Returns the parameter gradients and
    /// the per-position input (embedding) gradients.
    pub fn backward(
        &self,
        tape: &GradientTape,
        d_repr: &[f64],
    ) -> Result<(EncoderGrads, Vec<Vec<f64>>), EncodeError> {
        let expected_dims: Vec<(usize, usize)> = self
            .layers
            .iter()
            .map(|l| (l.forward.input_dim, l.forward.hidden_dim))
            .collect();
        if tape.layer_dims != expected_dims {
            return Err(EncodeError::TapeMismatch);
        }
        if d_repr.len() != self.output_dim() {
            return Err(EncodeError::DimensionMismatch {
                expected: self.output_dim(),
                found: d_repr.len(),
            });
        }

        let seq_len = tape.seq_len;
        let top_hidden = self.hidden_dim();
        let mut grads = EncoderGrads::zeros_like(self);

        // Output gradient of the top layer: forward half lands on the last
        // position, backward half on position zero.
        let mut out_grads = vec![vec![0.0; 2 * top_hidden]; seq_len];
        out_grads[seq_len - 1][..top_hidden].copy_from_slice(&d_repr[..top_hidden]);
        out_grads[0][top_hidden..].copy_from_slice(&d_repr[top_hidden..]);

        for (l, layer) in self.layers.iter().enumerate().rev() {
            let trace = &tape.layers[l];
            let hidden = layer.forward.hidden_dim;
            let mut d_inputs = vec![vec![0.0; layer.forward.input_dim]; seq_len];

            let fwd_out: Vec<&[f64]> = out_grads.iter().map(|g| &g[..hidden]).collect();
            direction_backward(
                &layer.forward,
                &trace.inputs,
                &trace.fwd,
                &fwd_out,
                true,
                &mut grads.layers[l].forward,
                &mut d_inputs,
            );
            let bwd_out: Vec<&[f64]> = out_grads.iter().map(|g| &g[hidden..]).collect();
            direction_backward(
                &layer.backward,
                &trace.inputs,
                &trace.bwd,
                &bwd_out,
                false,
                &mut grads.layers[l].backward,
                &mut d_inputs,
            );

            // Back through the inverted-dropout mask applied to this
            // layer's input.
            for d in d_inputs.iter_mut() {
                for (v, m) in d.iter_mut().zip(trace.mask.iter()) {
                    *v *= m;
                }
            }
            if l == 0 {
                return Ok((grads, d_inputs));
            }
            out_grads = d_inputs;
        }
        unreachable!("layer zero returns");
    }
}

#[allow(clippy::too_many_arguments)]
fn direction_backward(
    params: &LstmDirectionParams,
    inputs: &[Vec<f64>],
    trace: &DirectionTrace,
    out_grads: &[&[f64]],
    forward: bool,
    grads: &mut LstmDirectionParams,
    d_inputs: &mut [Vec<f64>],
) {
    let seq_len = inputs.len();
    let hidden = params.hidden_dim;
    let positions: Vec<usize> = if forward {
        (0..seq_len).collect()
    } else {
        (0..seq_len).rev().collect()
    };
    let zeros = vec![0.0; hidden];
    let mut dh_carry = vec![0.0; hidden];
    let mut dc_carry = vec![0.0; hidden];

    for k in (0..seq_len).rev() {
        let pos = positions[k];
        let gates = &trace.gates[pos];
        let tanh_c = &trace.tanh_cells[pos];
        let (h_prev, c_prev) = if k > 0 {
            let prev = positions[k - 1];
            (&trace.hiddens[prev], &trace.cells[prev])
        } else {
            (&zeros, &zeros)
        };

        let mut dh = dh_carry.clone();
        add_assign(&mut dh, out_grads[pos]);

        let mut d_gates: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hidden]);
        let mut dc_prev = vec![0.0; hidden];
        for j in 0..hidden {
            let i = gates[GATE_I][j];
            let f = gates[GATE_F][j];
            let o = gates[GATE_O][j];
            let g = gates[GATE_G][j];
            let tc = tanh_c[j];

            let d_o = dh[j] * tc;
            let dc = dh[j] * o * (1.0 - tc * tc) + dc_carry[j];
            let d_i = dc * g;
            let d_f = dc * c_prev[j];
            let d_g = dc * i;
            dc_prev[j] = dc * f;

            // Pre-activation gradients.
            d_gates[GATE_I][j] = d_i * i * (1.0 - i);
            d_gates[GATE_F][j] = d_f * f * (1.0 - f);
            d_gates[GATE_O][j] = d_o * o * (1.0 - o);
            d_gates[GATE_G][j] = d_g * (1.0 - g * g);
        }

        let x = &inputs[pos];
        let mut dh_next = vec![0.0; hidden];
        for (gate, d_gate) in d_gates.iter().enumerate() {
            grads.w[gate].add_outer(d_gate, x);
            grads.u[gate].add_outer(d_gate, h_prev);
            add_assign(&mut grads.b[gate], d_gate);
            add_assign(&mut d_inputs[pos], &params.w[gate].matvec_transpose(d_gate));
            add_assign(&mut dh_next, &params.u[gate].matvec_transpose(d_gate));
        }
        dh_carry = dh_next;
        dc_carry = dc_prev;
    }
}
