//! Binary model files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic "TXAE" | version u8 | model u8 (0 bda, 1 rsda) | phase u8 (0 pt, 1 ft)
//! seed u64 | vocabulary fingerprint u64 | input width u64
//! layer count L u64 | L × hidden width u64
//! L × RBM block (see `RbmParams::write_to`), bottom first
//! 2L × dense block: rows u64 | cols u64 | row-major weights | bias (cols)
//! ```
//!
//! Dense blocks hold the encoder (bottom first) then the decoder (code side
//! first), so a fine-tuned net with untied decoder weights round-trips.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{AutoencoderNet, DenseLayer, ModelKind, Phase};
use crate::error::{check_dim, Error, Result};
use crate::rbm::{read_exact, read_f64s, read_u64, RbmParams};
use crate::util::{read_bytes, write_atomic};

const MAGIC: &[u8; 4] = b"TXAE";
const FORMAT_VERSION: u8 = 1;

/// A network plus the provenance stored alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub net: AutoencoderNet,
    pub seed: u64,
    pub vocab_fingerprint: u64,
}

impl ModelFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let net = &self.net;
        w.write_all(MAGIC)?;
        let phase = match net.phase {
            Phase::Pretrained => 0u8,
            Phase::Finetuned => 1u8,
        };
        w.write_all(&[FORMAT_VERSION, net.model.tag(), phase])?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.vocab_fingerprint.to_le_bytes())?;
        w.write_all(&(net.input_dim() as u64).to_le_bytes())?;
        let sizes = net.layer_sizes();
        w.write_all(&(sizes.len() as u64).to_le_bytes())?;
        for s in &sizes {
            w.write_all(&(*s as u64).to_le_bytes())?;
        }
        for rbm in &net.stack {
            rbm.write_to(w)?;
        }
        for layer in net.layers() {
            w.write_all(&(layer.n_in() as u64).to_le_bytes())?;
            w.write_all(&(layer.n_out() as u64).to_le_bytes())?;
            for x in layer.weights.iter().chain(&layer.bias) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::format("model file", "bad magic"));
        }
        let mut head = [0u8; 3];
        read_exact(r, &mut head)?;
        if head[0] != FORMAT_VERSION {
            return Err(Error::format(
                "model file",
                format!("unsupported version {}", head[0]),
            ));
        }
        let model = match head[1] {
            0 => ModelKind::Bda,
            1 => ModelKind::Rsda,
            t => {
                return Err(Error::format(
                    "model file",
                    format!("unknown model tag {t}"),
                ))
            }
        };
        let phase = match head[2] {
            0 => Phase::Pretrained,
            1 => Phase::Finetuned,
            t => {
                return Err(Error::format(
                    "model file",
                    format!("unknown phase tag {t}"),
                ))
            }
        };
        let seed = read_u64(r)?;
        let vocab_fingerprint = read_u64(r)?;
        let input_dim = read_u64(r)? as usize;
        let n_layers = read_u64(r)? as usize;
        if n_layers == 0 || n_layers > 4096 {
            return Err(Error::format(
                "model file",
                format!("implausible layer count {n_layers}"),
            ));
        }
        let sizes = (0..n_layers)
            .map(|_| read_u64(r).map(|s| s as usize))
            .collect::<Result<Vec<_>>>()?;
        let stack = (0..n_layers)
            .map(|_| RbmParams::read_from(r))
            .collect::<Result<Vec<_>>>()?;

        let mut net = AutoencoderNet::unroll(model, stack)?;
        check_dim("model input width", input_dim, net.input_dim())?;
        if net.layer_sizes() != sizes {
            return Err(Error::format(
                "model file",
                "layer sizes disagree with RBM blocks",
            ));
        }
        for layer in net.layers_mut() {
            let rows = read_u64(r)? as usize;
            let cols = read_u64(r)? as usize;
            check_dim("dense block rows", layer.n_in(), rows)?;
            check_dim("dense block cols", layer.n_out(), cols)?;
            let weights = Array2::from_shape_vec((rows, cols), read_f64s(r, rows * cols)?)
                .map_err(|e| Error::format("model file", e.to_string()))?;
            let bias = Array1::from(read_f64s(r, cols)?);
            *layer = DenseLayer { weights, bias };
        }
        net.phase = phase;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)
            .map_err(|e| Error::format("model file", e.to_string()))?
            != 0
        {
            return Err(Error::format("model file", "trailing bytes"));
        }
        Ok(Self {
            net,
            seed,
            vocab_fingerprint,
        })
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        Self::read_from(&mut bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&read_bytes(path)?)
    }
}
