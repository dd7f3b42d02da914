use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::{BiLstmEncoder, BiLstmLayer, LstmDirectionParams};
use crate::math::Matrix;
use crate::ranker::{RankerModel, Scorer};
use crate::text::Vocabulary;

const MAGIC: &[u8; 7] = b"PRCKPT1";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a para-rank checkpoint")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint header: {0}")]
    BadHeader(String),
    #[error("unknown scorer kind {0:?}")]
    UnknownScorer(String),
    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("truncated tensor data at {0}")]
    Truncated(String),
    #[error("checkpoint io failed: {0}")]
    Io(#[from] std::io::Error),
}

/// A loaded model together with the vocabulary it was trained against.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: RankerModel,
    pub vocab: Vocabulary,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    tokenizer: TokenizerSettings,
    vocab: Vec<String>,
    encoder: EncoderSettings,
    scorer: ScorerSettings,
    tensors: Vec<TensorInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TokenizerSettings {
    lowercase: bool,
    split_punctuation: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct EncoderSettings {
    layers: usize,
    hidden: usize,
    /// Hidden units are counted per direction: the representation is
    /// 2×hidden wide.
    per_direction: bool,
    embedding_dim: usize,
    dropout: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScorerSettings {
    kind: String,
    mlp_hidden: usize,
}

#[derive(Debug, PartialEq, Eq, Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    rows: usize,
    cols: usize,
}

/// Tensor layout of a model in checkpoint order. Vectors are 1×n, the
/// MLP bias scalar is 1×1; data is row-major f64 little-endian.
fn tensor_layout(model: &RankerModel) -> Vec<(String, usize, usize)> {
    let mut layout = Vec::new();
    for (enc_name, encoder) in [("encoder_p", &model.encoder_p), ("encoder_q", &model.encoder_q)]
    {
        for (l, layer) in encoder.layers.iter().enumerate() {
            for (dir_name, dir) in [("fwd", &layer.forward), ("bwd", &layer.backward)] {
                for gate in ["i", "f", "o", "g"] {
                    layout.push((
                        format!("{enc_name}.layer{l}.{dir_name}.w_{gate}"),
                        dir.hidden_dim,
                        dir.input_dim,
                    ));
                }
                for gate in ["i", "f", "o", "g"] {
                    layout.push((
                        format!("{enc_name}.layer{l}.{dir_name}.u_{gate}"),
                        dir.hidden_dim,
                        dir.hidden_dim,
                    ));
                }
                for gate in ["i", "f", "o", "g"] {
                    layout.push((
                        format!("{enc_name}.layer{l}.{dir_name}.b_{gate}"),
                        1,
                        dir.hidden_dim,
                    ));
                }
            }
        }
    }
    match &model.scorer {
        Scorer::Dot => {}
        Scorer::Bilinear { w } => layout.push(("scorer.w".into(), w.rows(), w.cols())),
        Scorer::Mlp { w_h, b_h, v, .. } => {
            layout.push(("scorer.w_h".into(), w_h.rows(), w_h.cols()));
            layout.push(("scorer.b_h".into(), 1, b_h.len()));
            layout.push(("scorer.v".into(), 1, v.len()));
            layout.push(("scorer.b".into(), 1, 1));
        }
    }
    layout
}

/// Writes magic, a JSON header (tokenizer settings, vocabulary, encoder
/// hyperparameters, scorer kind, tensor table), then the tensors.
/// `load(save(model))` reproduces scores bit for bit.
pub fn checkpoint_save<P: AsRef<Path>>(
    model: &RankerModel,
    vocab: &Vocabulary,
    path: P,
) -> Result<(), CheckpointError> {
    let kind = match &model.scorer {
        Scorer::Dot => "dot",
        Scorer::Bilinear { .. } => "bilinear",
        Scorer::Mlp { .. } => "mlp",
    };
    let header = Header {
        version: VERSION,
        tokenizer: TokenizerSettings {
            lowercase: true,
            split_punctuation: true,
        },
        vocab: vocab.tokens().to_vec(),
        encoder: EncoderSettings {
            layers: model.encoder_p.layers.len(),
            hidden: model.encoder_p.hidden_dim(),
            per_direction: true,
            embedding_dim: model.encoder_p.embedding_dim(),
            dropout: model.encoder_p.dropout,
        },
        scorer: ScorerSettings {
            kind: kind.to_string(),
            mlp_hidden: model.mlp_hidden(),
        },
        tensors: tensor_layout(model)
            .into_iter()
            .map(|(name, rows, cols)| TensorInfo { name, rows, cols })
            .collect(),
    };
    let header_bytes =
        serde_json::to_vec(&header).map_err(|e| CheckpointError::BadHeader(e.to_string()))?;

    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_u64::<LittleEndian>(header_bytes.len() as u64)?;
    w.write_all(&header_bytes)?;
    for v in model.to_flat() {
        w.write_f64::<LittleEndian>(v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn checkpoint_load<P: AsRef<Path>>(path: P) -> Result<Checkpoint, CheckpointError> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 7];
    r.read_exact(&mut magic).map_err(|_| CheckpointError::BadMagic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let header_len = r.read_u64::<LittleEndian>()? as usize;
    if header_len > (1 << 30) {
        return Err(CheckpointError::BadHeader(format!(
            "implausible header length {header_len}"
        )));
    }
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes)
        .map_err(|_| CheckpointError::BadHeader("header shorter than declared".into()))?;
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| CheckpointError::BadHeader(e.to_string()))?;
    if header.version != VERSION {
        return Err(CheckpointError::Version(header.version));
    }

    let vocab = Vocabulary::from_id_ordered(header.vocab).map_err(CheckpointError::BadHeader)?;

    let enc = &header.encoder;
    if enc.layers == 0 || enc.hidden == 0 || enc.embedding_dim == 0 {
        return Err(CheckpointError::BadHeader(
            "encoder dimensions must be positive".into(),
        ));
    }
    if !enc.per_direction {
        return Err(CheckpointError::BadHeader(
            "only per-direction hidden counts are supported".into(),
        ));
    }
    let zero_encoder = || {
        let layers = (0..enc.layers)
            .map(|l| {
                let input_dim = if l == 0 { enc.embedding_dim } else { 2 * enc.hidden };
                BiLstmLayer {
                    forward: LstmDirectionParams::zeros(input_dim, enc.hidden),
                    backward: LstmDirectionParams::zeros(input_dim, enc.hidden),
                }
            })
            .collect();
        BiLstmEncoder {
            layers,
            dropout: enc.dropout,
        }
    };
    let repr_dim = 2 * enc.hidden;
    let scorer = match header.scorer.kind.as_str() {
        "dot" => Scorer::Dot,
        "bilinear" => Scorer::Bilinear {
            w: Matrix::zeros(repr_dim, repr_dim),
        },
        "mlp" => {
            let mh = header.scorer.mlp_hidden;
            if mh == 0 {
                return Err(CheckpointError::BadHeader(
                    "mlp scorer requires mlp_hidden > 0".into(),
                ));
            }
            Scorer::Mlp {
                w_h: Matrix::zeros(mh, 3 * repr_dim),
                b_h: vec![0.0; mh],
                v: vec![0.0; mh],
                b: 0.0,
            }
        }
        other => return Err(CheckpointError::UnknownScorer(other.to_string())),
    };
    let mut model = RankerModel {
        encoder_p: zero_encoder(),
        encoder_q: zero_encoder(),
        scorer,
    };

    // The header's tensor table must agree with the architecture the
    // hyperparameters describe.
    let expected: Vec<TensorInfo> = tensor_layout(&model)
        .into_iter()
        .map(|(name, rows, cols)| TensorInfo { name, rows, cols })
        .collect();
    if header.tensors.len() != expected.len() {
        return Err(CheckpointError::ShapeMismatch(format!(
            "expected {} tensors, header lists {}",
            expected.len(),
            header.tensors.len()
        )));
    }
    for (have, want) in header.tensors.iter().zip(expected.iter()) {
        if have != want {
            return Err(CheckpointError::ShapeMismatch(format!(
                "{} declared {}x{}, expected {}x{}",
                have.name, have.rows, have.cols, want.rows, want.cols
            )));
        }
    }

    // Read tensor data in layout order.
    let mut failed_at: Option<String> = None;
    {
        let mut names = expected.iter();
        model.visit_mut(&mut |slice| {
            let name = names.next().map(|t| t.name.clone()).unwrap_or_default();
            if failed_at.is_some() {
                return;
            }
            for v in slice.iter_mut() {
                match r.read_f64::<LittleEndian>() {
                    Ok(x) => *v = x,
                    Err(_) => {
                        failed_at = Some(name.clone());
                        return;
                    }
                }
            }
        });
    }
    if let Some(name) = failed_at {
        return Err(CheckpointError::Truncated(name));
    }
    Ok(Checkpoint { model, vocab })
}
