use rand::Rng;

use crate::math::Matrix;

pub const GATE_I: usize = 0;
pub const GATE_F: usize = 1;
pub const GATE_O: usize = 2;
pub const GATE_G: usize = 3;

/// Parameters of one LSTM direction: per-gate input weights `W`
/// (hidden × input), recurrent weights `U` (hidden × hidden), and biases.
/// Gate order is input, forget, output, cell candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmDirectionParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w: [Matrix; 4],
    pub u: [Matrix; 4],
    pub b: [Vec<f64>; 4],
}

impl LstmDirectionParams {
    /// Weights drawn uniformly from (-1/sqrt(H), 1/sqrt(H)); forget-gate
    /// bias starts at 1.0, the other biases at zero.
    pub fn init<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (hidden_dim as f64).sqrt();
        let mut rand_matrix = |rows: usize, cols: usize| {
            let data = (0..rows * cols)
                .map(|_| rng.gen_range(-scale..scale))
                .collect();
            Matrix::from_vec(rows, cols, data)
        };
        let w = [
            rand_matrix(hidden_dim, input_dim),
            rand_matrix(hidden_dim, input_dim),
            rand_matrix(hidden_dim, input_dim),
            rand_matrix(hidden_dim, input_dim),
        ];
        let u = [
            rand_matrix(hidden_dim, hidden_dim),
            rand_matrix(hidden_dim, hidden_dim),
            rand_matrix(hidden_dim, hidden_dim),
            rand_matrix(hidden_dim, hidden_dim),
        ];
        let mut b = [
            vec![0.0; hidden_dim],
            vec![0.0; hidden_dim],
            vec![0.0; hidden_dim],
            vec![0.0; hidden_dim],
        ];
        b[GATE_F] = vec![1.0; hidden_dim];
        LstmDirectionParams {
            input_dim,
            hidden_dim,
            w,
            u,
            b,
        }
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmDirectionParams {
            input_dim,
            hidden_dim,
            w: std::array::from_fn(|_| Matrix::zeros(hidden_dim, input_dim)),
            u: std::array::from_fn(|_| Matrix::zeros(hidden_dim, hidden_dim)),
            b: std::array::from_fn(|_| vec![0.0; hidden_dim]),
        }
    }

    pub fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        for m in &self.w {
            f(m.data());
        }
        for m in &self.u {
            f(m.data());
        }
        for v in &self.b {
            f(v);
        }
    }

    pub fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        for m in &mut self.w {
            f(m.data_mut());
        }
        for m in &mut self.u {
            f(m.data_mut());
        }
        for v in &mut self.b {
            f(v);
        }
    }
}

/// One bidirectional layer: separate parameter sets per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmLayer {
    pub forward: LstmDirectionParams,
    pub backward: LstmDirectionParams,
}

/// A stack of bidirectional LSTM layers. Layer `l > 0` consumes the
/// 2×hidden concatenated output of layer `l - 1`; the representation
/// width is 2×hidden of the top layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmEncoder {
    pub layers: Vec<BiLstmLayer>,
    pub dropout: f64,
}

impl BiLstmEncoder {
    pub fn init<R: Rng>(
        embedding_dim: usize,
        hidden_dim: usize,
        num_layers: usize,
        dropout: f64,
        rng: &mut R,
    ) -> Self {
        assert!(num_layers >= 1, "encoder needs at least one layer");
        assert!((0.0..1.0).contains(&dropout), "dropout must be in [0, 1)");
        let mut layers = Vec::with_capacity(num_layers);
        for l in 0..num_layers {
            let input_dim = if l == 0 { embedding_dim } else { 2 * hidden_dim };
            layers.push(BiLstmLayer {
                forward: LstmDirectionParams::init(input_dim, hidden_dim, rng),
                backward: LstmDirectionParams::init(input_dim, hidden_dim, rng),
            });
        }
        BiLstmEncoder { layers, dropout }
    }

    pub fn embedding_dim(&self) -> usize {
        self.layers[0].forward.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers.last().expect("non-empty").forward.hidden_dim
    }

    /// Width of the sequence representation (2 × top-layer hidden).
    pub fn output_dim(&self) -> usize {
        2 * self.hidden_dim()
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

    pub fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |s| n += s.len());
        n
    }

    pub fn push_flat(&self, out: &mut Vec<f64>) {
        self.visit(&mut |s| out.extend_from_slice(s));
    }

    pub fn read_flat(&mut self, src: &[f64], cursor: &mut usize) {
        self.visit_mut(&mut |s| {
            s.copy_from_slice(&src[*cursor..*cursor + s.len()]);
            *cursor += s.len();
        });
    }
}
