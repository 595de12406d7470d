//! Deep autoencoders built from a stack of pretrained RBMs.
//!
//! The stack `n → h1 → … → m` is unrolled into a `2L`-layer network: the
//! encoder reuses each RBM's weights and hidden bias, the decoder mirrors the
//! stack with transposed weights and visible biases. All hidden units and the
//! code layer are real-valued sigmoid probabilities. The output layer is a
//! per-term sigmoid for the binary model (bDA) and a softmax over the
//! vocabulary for the replicated-softmax model (rsDA).
//!
//! The rsDA network consumes raw counts: its first layer computes
//! `D·b + v̂ W`, which equals the replicated-softmax hidden input, and its
//! loss compares the softmax output against `v̂ / D`.

mod io;
mod train;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceVector, VectorMode};
use crate::error::{check_dim, Error, Result};
use crate::rbm::{Flavor, RbmHyper, RbmParams};
use crate::rows::{RowSource, SparseRows};
use crate::util::{sigmoid, softmax_in_place};

pub use io::ModelFile;
pub use train::{
    pretrain_stack, train_autoencoder, EpochLog, Gradients, PretrainOutcome, TrainOutcome,
};

/// Probabilities are clamped to `[LOG_CLIP, 1 - LOG_CLIP]` inside logarithms.
pub const LOG_CLIP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Binary bottom RBM, sigmoid output, binary cross-entropy.
    Bda,
    /// Replicated-softmax bottom RBM, softmax output, multinomial cross-entropy.
    Rsda,
}

impl ModelKind {
    pub fn input_mode(self) -> VectorMode {
        match self {
            ModelKind::Bda => VectorMode::Binary,
            ModelKind::Rsda => VectorMode::Count,
        }
    }

    pub fn bottom_flavor(self) -> Flavor {
        match self {
            ModelKind::Bda => Flavor::BinaryBinary,
            ModelKind::Rsda => Flavor::ReplicatedSoftmax,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Bda => "bda",
            ModelKind::Rsda => "rsda",
        }
    }

    fn tag(self) -> u8 {
        match self {
            ModelKind::Bda => 0,
            ModelKind::Rsda => 1,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bda" => Ok(ModelKind::Bda),
            "rsda" => Ok(ModelKind::Rsda),
            _ => Err(Error::InvalidConfig(format!(
                "unknown model {s:?} (expected bda or rsda)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Pretrained,
    Finetuned,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Pretrained => "pretrained",
            Phase::Finetuned => "finetuned",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainHyper {
    /// Learning rate of the bottom RBM.
    pub lr_bottom: f64,
    /// Learning rate of every RBM above the bottom one.
    pub lr_upper: f64,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch_epoch: usize,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub init_std: f64,
}

impl PretrainHyper {
    pub fn for_model(model: ModelKind) -> Self {
        let bottom = RbmHyper::for_flavor(model.bottom_flavor());
        Self {
            lr_bottom: bottom.lr,
            lr_upper: RbmHyper::for_flavor(Flavor::BinaryBinary).lr,
            initial_momentum: bottom.initial_momentum,
            final_momentum: bottom.final_momentum,
            momentum_switch_epoch: bottom.momentum_switch_epoch,
            weight_decay: bottom.weight_decay,
            batch_size: bottom.batch_size,
            init_std: 0.01,
        }
    }

    pub fn rbm_hyper(&self, bottom: bool) -> RbmHyper {
        RbmHyper {
            lr: if bottom {
                self.lr_bottom
            } else {
                self.lr_upper
            },
            initial_momentum: self.initial_momentum,
            final_momentum: self.final_momentum,
            momentum_switch_epoch: self.momentum_switch_epoch,
            weight_decay: self.weight_decay,
            batch_size: self.batch_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineTuneHyper {
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
}

impl FineTuneHyper {
    pub fn for_model(model: ModelKind) -> Self {
        Self {
            lr: match model {
                ModelKind::Bda => 0.1,
                ModelKind::Rsda => 0.01,
            },
            momentum: 0.9,
            batch_size: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lr.is_finite()
            && self.lr >= 0.0
            && (0.0..1.0).contains(&self.momentum)
            && self.batch_size >= 1
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "bad fine-tuning hyperparameters {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub model: ModelKind,
    /// Hidden widths from the bottom up; the last entry is the bottleneck m.
    pub layer_sizes: Vec<usize>,
    pub epochs_pretrain: usize,
    pub epochs_finetune: usize,
    pub seed: u64,
    pub pretrain: PretrainHyper,
    pub finetune: FineTuneHyper,
}

impl NetConfig {
    pub fn new(model: ModelKind, layer_sizes: Vec<usize>) -> Self {
        Self {
            model,
            layer_sizes,
            epochs_pretrain: 50,
            epochs_finetune: 50,
            seed: 42,
            pretrain: PretrainHyper::for_model(model),
            finetune: FineTuneHyper::for_model(model),
        }
    }

    /// The 500-250-250-m stack.
    pub fn standard(model: ModelKind, bottleneck: usize) -> Self {
        Self::new(model, vec![500, 250, 250, bottleneck])
    }

    pub fn bottleneck(&self) -> usize {
        self.layer_sizes.last().copied().unwrap_or(0)
    }

    /// Same configuration with the top width replaced by `m`.
    pub fn with_bottleneck(&self, m: usize) -> Self {
        let mut c = self.clone();
        if let Some(last) = c.layer_sizes.last_mut() {
            *last = m;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.is_empty() || self.layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "layer sizes must be non-empty and positive, got {:?}",
                self.layer_sizes
            )));
        }
        if self.epochs_pretrain == 0 {
            return Err(Error::InvalidConfig(
                "epochs_pretrain must be at least 1".into(),
            ));
        }
        if !(self.pretrain.init_std.is_finite() && self.pretrain.init_std >= 0.0) {
            return Err(Error::InvalidConfig(
                "init_std must be finite and non-negative".into(),
            ));
        }
        self.pretrain.rbm_hyper(true).validate()?;
        self.pretrain.rbm_hyper(false).validate()?;
        self.finetune.validate()
    }
}

/// Affine map `y = x W + b` with `W` stored `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn zeros_like(other: &DenseLayer) -> Self {
        Self {
            weights: Array2::zeros(other.weights.raw_dim()),
            bias: Array1::zeros(other.bias.len()),
        }
    }

    pub fn n_in(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_out(&self) -> usize {
        self.weights.ncols()
    }

    fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderNet {
    pub model: ModelKind,
    /// The pretrained RBMs, bottom first. Kept unchanged by fine-tuning.
    pub stack: Vec<RbmParams>,
    /// Encoder layers, bottom first.
    pub encoder: Vec<DenseLayer>,
    /// Decoder layers, from the code back to the output.
    pub decoder: Vec<DenseLayer>,
    pub phase: Phase,
}

impl AutoencoderNet {
    /// Builds the encoder/decoder from a pretrained stack. Decoder weights
    /// start as exact transposes of the encoder weights.
    pub fn unroll(model: ModelKind, stack: Vec<RbmParams>) -> Result<Self> {
        if stack.is_empty() {
            return Err(Error::InvalidConfig(
                "cannot unroll an empty RBM stack".into(),
            ));
        }
        if stack[0].flavor != model.bottom_flavor() {
            return Err(Error::WrongFlavor {
                expected: match model {
                    ModelKind::Bda => "binary bottom",
                    ModelKind::Rsda => "replicated-softmax bottom",
                },
            });
        }
        for pair in stack.windows(2) {
            check_dim(
                "stacked RBM visible width",
                pair[0].n_hidden(),
                pair[1].n_visible(),
            )?;
            if pair[1].flavor != Flavor::BinaryBinary {
                return Err(Error::WrongFlavor {
                    expected: "binary upper-layer",
                });
            }
        }
        let encoder = stack
            .iter()
            .map(|r| DenseLayer {
                weights: r.weights.clone(),
                bias: r.hid_bias.clone(),
            })
            .collect();
        let decoder = stack
            .iter()
            .rev()
            .map(|r| DenseLayer {
                weights: r.weights.t().to_owned(),
                bias: r.vis_bias.clone(),
            })
            .collect();
        Ok(Self {
            model,
            stack,
            encoder,
            decoder,
            phase: Phase::Pretrained,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder[0].n_in()
    }

    pub fn code_dim(&self) -> usize {
        self.encoder.last().map_or(0, DenseLayer::n_out)
    }

    /// Hidden widths bottom-up, ending with the bottleneck.
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.encoder.iter().map(DenseLayer::n_out).collect()
    }

    /// Encoder layers followed by decoder layers.
    pub fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.encoder.iter().chain(&self.decoder)
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut DenseLayer> {
        self.encoder.iter_mut().chain(self.decoder.iter_mut())
    }

    pub fn is_finite(&self) -> bool {
        self.layers().all(DenseLayer::is_finite)
    }

    /// The model's view of a corpus as network input rows.
    pub fn input_rows<'a>(&self, vectors: &'a [SentenceVector]) -> Result<SparseRows<'a>> {
        if let Some(v) = vectors.iter().find(|v| v.min_dim() > self.input_dim()) {
            return Err(Error::DimensionMismatch {
                what: "sentence vector index range",
                expected: self.input_dim(),
                got: v.min_dim(),
            });
        }
        Ok(SparseRows::new(
            vectors,
            self.input_dim(),
            self.model.input_mode(),
        ))
    }

    fn n_layers(&self) -> usize {
        self.encoder.len() + self.decoder.len()
    }

    fn layer_at(&self, i: usize) -> &DenseLayer {
        match i.checked_sub(self.encoder.len()) {
            None => &self.encoder[i],
            Some(j) => &self.decoder[j],
        }
    }

    fn apply_layer(&self, layer: usize, input: ArrayView2<f64>) -> Array2<f64> {
        let l = self.layer_at(layer);
        let mut pre = input.dot(&l.weights);
        if layer == 0 && self.model == ModelKind::Rsda {
            let lengths = input.sum_axis(Axis(1));
            Zip::from(pre.rows_mut())
                .and(&lengths)
                .for_each(|mut row, &d| {
                    row.scaled_add(d, &l.bias);
                });
        } else {
            pre += &l.bias;
        }
        if layer + 1 == self.n_layers() && self.model == ModelKind::Rsda {
            for mut row in pre.rows_mut() {
                softmax_in_place(row.as_slice_mut().expect("row of standard layout array"));
            }
        } else {
            pre.mapv_inplace(sigmoid);
        }
        pre
    }

    /// Outputs of every layer (encoder then decoder) for a batch of inputs.
    pub fn forward_all(&self, input: ArrayView2<f64>) -> Result<Vec<Array2<f64>>> {
        check_dim("input width", self.input_dim(), input.ncols())?;
        let n_layers = self.n_layers();
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        for layer in 0..n_layers {
            let next = match acts.last() {
                None => self.apply_layer(layer, input),
                Some(prev) => self.apply_layer(layer, prev.view()),
            };
            acts.push(next);
        }
        Ok(acts)
    }

    pub fn encode_batch(&self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_dim("input width", self.input_dim(), input.ncols())?;
        let mut x = self.apply_layer(0, input);
        for layer in 1..self.encoder.len() {
            x = self.apply_layer(layer, x.view());
        }
        Ok(x)
    }

    pub fn decode_batch(&self, code: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_dim("code width", self.code_dim(), code.ncols())?;
        let start = self.encoder.len();
        let mut x = self.apply_layer(start, code);
        for layer in start + 1..start + self.decoder.len() {
            x = self.apply_layer(layer, x.view());
        }
        Ok(x)
    }

    pub fn reconstruct_batch(&self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        let code = self.encode_batch(input)?;
        self.decode_batch(code.view())
    }

    /// Deterministic code for one sentence (real-valued probabilities).
    pub fn encode(&self, x: &SentenceVector) -> Result<Array1<f64>> {
        let rows = self.input_rows(std::slice::from_ref(x))?;
        Ok(self
            .encode_batch(rows.gather(&[0]).view())?
            .row(0)
            .to_owned())
    }

    pub fn decode(&self, code: ArrayView1<f64>) -> Result<Array1<f64>> {
        let out = self.decode_batch(code.insert_axis(Axis(0)))?;
        Ok(out.row(0).to_owned())
    }

    /// `decode(encode(x))`.
    pub fn reconstruct(&self, x: &SentenceVector) -> Result<Array1<f64>> {
        let code = self.encode(x)?;
        self.decode(code.view())
    }

    /// Top-down mean-field pass through the pretrained RBMs' visible
    /// conditionals. Matches `decode_batch` until fine-tuning changes the
    /// decoder.
    pub fn stack_generative_pass(&self, code: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut x = code.to_owned();
        for rbm in self.stack.iter().rev() {
            x = rbm.visible_probs_batch(x.view())?;
        }
        Ok(x)
    }

    /// Per-row training targets: the binary input itself for bDA, counts
    /// divided by sentence length for rsDA (zero rows stay zero).
    pub fn targets(&self, input: ArrayView2<f64>) -> Array2<f64> {
        match self.model {
            ModelKind::Bda => input.to_owned(),
            ModelKind::Rsda => {
                let mut t = input.to_owned();
                for mut row in t.rows_mut() {
                    let d = row.sum();
                    if d > 0.0 {
                        row /= d;
                    }
                }
                t
            }
        }
    }
}

/// Cross-entropy between a target and a reconstruction.
///
/// bDA: `-Σ [x log x̂ + (1-x) log(1-x̂)]` with binary-ish targets in `[0,1]`.
/// rsDA: `-Σ x log x̂` where the target is a probability vector.
pub fn cross_entropy(target: &[f64], output: &[f64], model: ModelKind) -> Result<f64> {
    check_dim("reconstruction length", target.len(), output.len())?;
    match model {
        ModelKind::Bda => {
            if let Some(x) = target.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::InvalidTarget(format!(
                    "bDA target entry {x} outside [0,1]"
                )));
            }
        }
        ModelKind::Rsda => {
            if target.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidTarget(
                    "rsDA target has a negative entry".into(),
                ));
            }
            let s: f64 = target.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidTarget(format!(
                    "rsDA target sums to {s}, expected 1"
                )));
            }
        }
    }
    Ok(cross_entropy_unchecked(target, output, model))
}

pub(crate) fn cross_entropy_unchecked(target: &[f64], output: &[f64], model: ModelKind) -> f64 {
    let clip = |p: f64| p.clamp(LOG_CLIP, 1.0 - LOG_CLIP);
    match model {
        ModelKind::Bda => -target
            .iter()
            .zip(output)
            .map(|(&x, &p)| {
                let p = clip(p);
                x * p.ln() + (1.0 - x) * (1.0 - p).ln()
            })
            .sum::<f64>(),
        ModelKind::Rsda => -target
            .iter()
            .zip(output)
            .filter(|(&x, _)| x != 0.0)
            .map(|(&x, &p)| x * clip(p).ln())
            .sum::<f64>(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng_from_seed;
    use ndarray::array;

    fn random_stack(model: ModelKind, sizes: &[usize], seed: u64) -> Vec<RbmParams> {
        let mut rng = rng_from_seed(seed);
        sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let flavor = if i == 0 {
                    model.bottom_flavor()
                } else {
                    Flavor::BinaryBinary
                };
                let mut r = RbmParams::init_gaussian(w[0], w[1], flavor, 0.5, &mut rng);
                r.vis_bias.mapv_inplace(|_| 0.1 * i as f64 - 0.2);
                r.hid_bias.mapv_inplace(|_| 0.05);
                r
            })
            .collect()
    }

    #[test]
    fn cross_entropy_examples() {
        let ce = cross_entropy(&[0.5, 0.5], &[0.5, 0.5], ModelKind::Bda).unwrap();
        assert!((ce - 2.0 * 2f64.ln()).abs() < 1e-12);

        let eps = 1e-6;
        let ce = cross_entropy(&[1.0, 0.0], &[1.0 - eps, eps], ModelKind::Rsda).unwrap();
        assert!((ce - -(1.0 - eps).ln()).abs() < 1e-15);
        assert!((ce - eps).abs() < 1e-11);

        let ce = cross_entropy(&[0.0, 0.0, 0.0], &[1e-300, 0.0, 1e-20], ModelKind::Bda).unwrap();
        assert!((0.0..1e-9).contains(&ce));

        assert!(matches!(
            cross_entropy(&[1.5], &[0.5], ModelKind::Bda),
            Err(Error::InvalidTarget(_))
        ));
        assert!(matches!(
            cross_entropy(&[0.5, 0.4], &[0.5, 0.5], ModelKind::Rsda),
            Err(Error::InvalidTarget(_))
        ));
        assert!(matches!(
            cross_entropy(&[1.0], &[0.5, 0.5], ModelKind::Rsda),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_weight_net_codes_are_half() {
        let stack = vec![
            RbmParams::zeros(5, 3, Flavor::BinaryBinary),
            RbmParams::zeros(3, 2, Flavor::BinaryBinary),
        ];
        let net = AutoencoderNet::unroll(ModelKind::Bda, stack).unwrap();
        let x = SentenceVector::from_pairs(vec![(0, 2), (3, 1)]).unwrap();
        assert_eq!(net.encode(&x).unwrap(), array![0.5, 0.5]);
        let xhat = net.reconstruct(&x).unwrap();
        assert_eq!(xhat.len(), 5);
        assert!(xhat.iter().all(|&p| p == 0.5));
    }

    #[test]
    fn shapes_and_output_ranges() {
        for model in [ModelKind::Bda, ModelKind::Rsda] {
            let net = AutoencoderNet::unroll(model, random_stack(model, &[7, 5, 3, 2], 7)).unwrap();
            assert_eq!(net.layer_sizes(), vec![5, 3, 2]);
            assert_eq!(net.code_dim(), 2);
            let x = SentenceVector::from_pairs(vec![(1, 1), (6, 3)]).unwrap();
            let code = net.encode(&x).unwrap();
            assert_eq!(code.len(), 2);
            assert_eq!(code, net.encode(&x).unwrap());
            let out = net.decode(array![0.9, 0.1].view()).unwrap();
            assert_eq!(out.len(), 7);
            match model {
                ModelKind::Bda => assert!(out.iter().all(|&p| p > 0.0 && p < 1.0)),
                ModelKind::Rsda => assert!((out.sum() - 1.0).abs() < 1e-12),
            }
            assert!(matches!(
                net.decode(array![0.5].view()),
                Err(Error::DimensionMismatch { .. })
            ));
            let too_wide = SentenceVector::from_pairs(vec![(7, 1)]).unwrap();
            assert!(net.encode(&too_wide).is_err());
        }
    }

    #[test]
    fn unrolled_decoder_matches_stack_generative_pass() {
        for model in [ModelKind::Bda, ModelKind::Rsda] {
            let net = AutoencoderNet::unroll(model, random_stack(model, &[6, 4, 3], 21)).unwrap();
            for (enc, dec) in net.encoder.iter().zip(net.decoder.iter().rev()) {
                assert_eq!(enc.weights.t(), dec.weights);
            }
            let code = array![[0.1, 0.7, 0.4], [1.0, 0.0, 0.5]];
            let a = net.decode_batch(code.view()).unwrap();
            let b = net.stack_generative_pass(code.view()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rsda_first_layer_matches_rbm_hidden_probs() {
        let stack = random_stack(ModelKind::Rsda, &[5, 3, 2], 4);
        let net = AutoencoderNet::unroll(ModelKind::Rsda, stack.clone()).unwrap();
        let x = array![[2.0, 0.0, 1.0, 0.0, 1.0]];
        let layer0 = &net.forward_all(x.view()).unwrap()[0];
        let h = stack[0].hidden_probs(x.row(0)).unwrap();
        for j in 0..3 {
            assert!((layer0[[0, j]] - h[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn unroll_rejects_inconsistent_stacks() {
        let bad = vec![
            RbmParams::zeros(5, 3, Flavor::BinaryBinary),
            RbmParams::zeros(4, 2, Flavor::BinaryBinary),
        ];
        assert!(AutoencoderNet::unroll(ModelKind::Bda, bad).is_err());
        let wrong_bottom = vec![RbmParams::zeros(5, 3, Flavor::BinaryBinary)];
        assert!(AutoencoderNet::unroll(ModelKind::Rsda, wrong_bottom).is_err());
        assert!(AutoencoderNet::unroll(ModelKind::Bda, vec![]).is_err());
    }

    #[test]
    fn config_validation_and_bottleneck() {
        let c = NetConfig::standard(ModelKind::Bda, 40);
        assert_eq!(c.layer_sizes, vec![500, 250, 250, 40]);
        assert_eq!(c.bottleneck(), 40);
        assert_eq!(c.with_bottleneck(10).layer_sizes, vec![500, 250, 250, 10]);
        c.validate().unwrap();
        assert!(NetConfig::new(ModelKind::Bda, vec![]).validate().is_err());
        assert!(NetConfig::new(ModelKind::Bda, vec![4, 0])
            .validate()
            .is_err());
        assert_eq!(
            NetConfig::standard(ModelKind::Rsda, 40).pretrain.lr_bottom,
            0.001
        );
        assert_eq!(NetConfig::standard(ModelKind::Rsda, 40).finetune.lr, 0.01);
        assert_eq!("RSDA".parse::<ModelKind>().unwrap(), ModelKind::Rsda);
        assert!("lda".parse::<ModelKind>().is_err());
    }

    #[test]
    fn rsda_targets_are_distributions() {
        let net =
            AutoencoderNet::unroll(ModelKind::Rsda, random_stack(ModelKind::Rsda, &[3, 2], 1))
                .unwrap();
        let t = net.targets(array![[2.0, 1.0, 1.0], [0.0, 0.0, 0.0]].view());
        assert_eq!(t.row(0), array![0.5, 0.25, 0.25]);
        assert_eq!(t.row(1), array![0.0, 0.0, 0.0]);
    }
}
