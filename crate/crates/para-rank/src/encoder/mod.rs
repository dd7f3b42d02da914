//! Multi-layer bidirectional LSTM encoders with exact reverse-mode
//! gradients.
//!
//! A sequence representation is the concatenation of the forward LSTM's
//! hidden state at the last position and the backward LSTM's hidden state
//! at position zero (the state that has read the whole sequence). Training
//! mode applies inverted dropout with one mask per layer input, shared
//! across time steps, so inference needs no rescaling.

mod backward;
mod forward;
mod params;

pub use backward::EncoderGrads;
pub use forward::{lstm_cell_forward, GradientTape, Mode};
pub use params::{BiLstmEncoder, BiLstmLayer, LstmDirectionParams, GATE_F, GATE_G, GATE_I, GATE_O};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EncodeError {
    #[error("cannot encode empty sequence")]
    EmptySequence,
    #[error("input width {found} does not match encoder input dim {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("gradient tape does not match this encoder")]
    TapeMismatch,
}
