//! Greedy layer-wise pretraining and backpropagation fine-tuning.

use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    cross_entropy_unchecked, AutoencoderNet, DenseLayer, FineTuneHyper, ModelKind, NetConfig, Phase,
};
use crate::corpus::SentenceVector;
use crate::error::{Error, Result};
use crate::rbm::{train_rbm, CdStats, Flavor, RbmParams};
use crate::rows::{RowSource, SparseRows};
use crate::util::rng_from_seed;

/// Hidden-probability propagation is done in chunks of this many rows.
const PROPAGATE_CHUNK: usize = 1024;

#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub stack: Vec<RbmParams>,
    /// Per-layer, per-epoch CD statistics.
    pub logs: Vec<Vec<CdStats>>,
}

/// One row of the fine-tuning log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean cross-entropy per sentence over the epoch's minibatches.
    pub loss: f64,
    pub wall_ms: u128,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub pretrained: AutoencoderNet,
    /// `None` when fine-tuning was skipped.
    pub finetuned: Option<AutoencoderNet>,
    pub pretrain_logs: Vec<Vec<CdStats>>,
    pub finetune_log: Vec<EpochLog>,
}

impl TrainOutcome {
    /// The fine-tuned net when there is one, otherwise the pretrained one.
    pub fn final_net(&self) -> &AutoencoderNet {
        self.finetuned.as_ref().unwrap_or(&self.pretrained)
    }
}

fn non_empty(vectors: &[SentenceVector]) -> Vec<SentenceVector> {
    vectors.iter().filter(|v| !v.is_empty()).cloned().collect()
}

/// Trains the RBM stack bottom-up. The bottom RBM sees binary vectors (bDA)
/// or counts (rsDA); each RBM above is trained on the hidden probabilities
/// of the trained layer below. Empty sentences are ignored.
pub fn pretrain_stack<R: Rng + ?Sized>(
    config: &NetConfig,
    input_dim: usize,
    train: &[SentenceVector],
    rng: &mut R,
) -> Result<PretrainOutcome> {
    config.validate()?;
    if let Some(v) = train.iter().find(|v| v.min_dim() > input_dim) {
        return Err(Error::DimensionMismatch {
            what: "sentence vector index range",
            expected: input_dim,
            got: v.min_dim(),
        });
    }
    let train = non_empty(train);
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }

    let mut stack = Vec::with_capacity(config.layer_sizes.len());
    let mut logs = Vec::with_capacity(config.layer_sizes.len());
    let bottom_rows = SparseRows::new(&train, input_dim, config.model.input_mode());
    let mut upper_data: Option<Array2<f64>> = None;
    let mut n_visible = input_dim;
    for (layer, &n_hidden) in config.layer_sizes.iter().enumerate() {
        let flavor = if layer == 0 {
            config.model.bottom_flavor()
        } else {
            Flavor::BinaryBinary
        };
        let data: &dyn RowSource = match &upper_data {
            None => &bottom_rows,
            Some(d) => d,
        };
        let mut rbm =
            RbmParams::init_gaussian(n_visible, n_hidden, flavor, config.pretrain.init_std, rng);
        let log = train_rbm(
            &mut rbm,
            data,
            config.epochs_pretrain,
            &config.pretrain.rbm_hyper(layer == 0),
            rng,
        )?;
        let next = propagate(&rbm, data)?;
        stack.push(rbm);
        logs.push(log);
        upper_data = Some(next);
        n_visible = n_hidden;
    }
    Ok(PretrainOutcome { stack, logs })
}

fn propagate(rbm: &RbmParams, data: &dyn RowSource) -> Result<Array2<f64>> {
    let n = data.n_rows();
    let mut out = Array2::zeros((n, rbm.n_hidden()));
    let idx: Vec<usize> = (0..n).collect();
    for (c, chunk) in idx.chunks(PROPAGATE_CHUNK).enumerate() {
        let h = rbm.hidden_probs_batch(data.gather(chunk).view())?;
        let start = c * PROPAGATE_CHUNK;
        out.slice_mut(ndarray::s![start..start + chunk.len(), ..])
            .assign(&h);
    }
    Ok(out)
}

/// Gradients of the summed batch loss, laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub encoder: Vec<DenseLayer>,
    pub decoder: Vec<DenseLayer>,
}

impl Gradients {
    pub fn zeros_like(net: &AutoencoderNet) -> Self {
        Self {
            encoder: net.encoder.iter().map(DenseLayer::zeros_like).collect(),
            decoder: net.decoder.iter().map(DenseLayer::zeros_like).collect(),
        }
    }

    /// Encoder layers followed by decoder layers, like
    /// [`AutoencoderNet::layers`].
    pub fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.encoder.iter().chain(&self.decoder)
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut DenseLayer> {
        self.encoder.iter_mut().chain(self.decoder.iter_mut())
    }
}

impl AutoencoderNet {
    /// Cross-entropy summed over the rows of `input` against
    /// [`targets`](Self::targets).
    pub fn batch_loss(&self, input: ArrayView2<f64>) -> Result<f64> {
        let out = self.reconstruct_batch(input)?;
        let targets = self.targets(input);
        Ok(summed_loss(self.model, targets.view(), out.view()))
    }

    /// Summed batch loss and its gradient with respect to every weight and
    /// bias. Both output heads pair with their loss so the output error is
    /// `x̂ - target`.
    pub fn loss_and_gradient(&self, input: ArrayView2<f64>) -> Result<(f64, Gradients)> {
        let acts = self.forward_all(input)?;
        let targets = self.targets(input);
        let output = acts.last().expect("network has layers");
        let loss = summed_loss(self.model, targets.view(), output.view());

        let mut grads = Gradients::zeros_like(self);
        let n_layers = acts.len();
        let mut delta = output - &targets;
        for k in (0..n_layers).rev() {
            let layer_in = if k == 0 { input } else { acts[k - 1].view() };
            let g = grads
                .layers_mut()
                .nth(k)
                .expect("gradient layout mirrors net");
            g.weights = layer_in.t().dot(&delta);
            g.bias = if k == 0 && self.model == ModelKind::Rsda {
                let lengths = input.sum_axis(Axis(1)).insert_axis(Axis(1));
                (&delta * &lengths).sum_axis(Axis(0))
            } else {
                delta.sum_axis(Axis(0))
            };
            if k > 0 {
                let w = &self.layers().nth(k).expect("layer index in range").weights;
                let a = &acts[k - 1];
                delta = delta.dot(&w.t()) * &a.mapv(|p| p * (1.0 - p));
            }
        }
        Ok((loss, grads))
    }

    /// Minibatch SGD with momentum on the reconstruction cross-entropy.
    /// Steps use the batch-mean gradient. Each epoch starts from a
    /// checkpoint; if the epoch produces a non-finite loss or parameter the
    /// net is restored to it and `NonFiniteUpdate` is returned.
    pub fn fine_tune<R: Rng + ?Sized>(
        &mut self,
        train: &[SentenceVector],
        hyper: &FineTuneHyper,
        epochs: usize,
        rng: &mut R,
    ) -> Result<Vec<EpochLog>> {
        hyper.validate()?;
        let train = non_empty(train);
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let rows = self.input_rows(&train)?;
        let n = rows.n_rows();
        let mut order: Vec<usize> = (0..n).collect();
        let mut velocity = Gradients::zeros_like(self);
        let mut log = Vec::with_capacity(epochs);

        for epoch in 0..epochs {
            let started = Instant::now();
            let checkpoint = (self.encoder.clone(), self.decoder.clone());
            if n > hyper.batch_size {
                order.shuffle(rng);
            }
            let mut total = 0.0;
            for chunk in order.chunks(hyper.batch_size) {
                let x = rows.gather(chunk);
                let (loss, grads) = self.loss_and_gradient(x.view())?;
                total += loss;
                let step = hyper.lr / chunk.len() as f64;
                for ((p, v), g) in self
                    .layers_mut()
                    .zip(velocity.layers_mut())
                    .zip(grads.layers())
                {
                    v.weights *= hyper.momentum;
                    v.weights.scaled_add(-step, &g.weights);
                    v.bias *= hyper.momentum;
                    v.bias.scaled_add(-step, &g.bias);
                    p.weights += &v.weights;
                    p.bias += &v.bias;
                }
            }
            let mean = total / n as f64;
            if !mean.is_finite() || !self.is_finite() {
                (self.encoder, self.decoder) = checkpoint;
                return Err(Error::NonFiniteUpdate {
                    stage: "fine-tuning",
                    epoch,
                });
            }
            log.push(EpochLog {
                epoch,
                loss: mean,
                wall_ms: started.elapsed().as_millis(),
            });
        }
        if epochs > 0 {
            self.phase = Phase::Finetuned;
        }
        Ok(log)
    }
}

fn summed_loss(model: ModelKind, targets: ArrayView2<f64>, outputs: ArrayView2<f64>) -> f64 {
    targets
        .rows()
        .into_iter()
        .zip(outputs.rows())
        .map(|(t, o)| {
            cross_entropy_unchecked(
                t.as_slice().expect("standard layout"),
                o.as_slice().expect("standard layout"),
                model,
            )
        })
        .sum()
}

/// Pretrains, unrolls and (unless skipped) fine-tunes, all from
/// `config.seed`.
pub fn train_autoencoder(
    config: &NetConfig,
    input_dim: usize,
    train: &[SentenceVector],
    skip_finetune: bool,
) -> Result<TrainOutcome> {
    let mut rng = rng_from_seed(config.seed);
    let PretrainOutcome { stack, logs } = pretrain_stack(config, input_dim, train, &mut rng)?;
    let pretrained = AutoencoderNet::unroll(config.model, stack)?;
    let (finetuned, finetune_log) = if skip_finetune || config.epochs_finetune == 0 {
        (None, Vec::new())
    } else {
        let mut net = pretrained.clone();
        let log = net.fine_tune(train, &config.finetune, config.epochs_finetune, &mut rng)?;
        (Some(net), log)
    };
    Ok(TrainOutcome {
        pretrained,
        finetuned,
        pretrain_logs: logs,
        finetune_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::cross_entropy;

    fn tiny_corpus() -> Vec<SentenceVector> {
        let patterns: [&[(u32, u32)]; 3] =
            [&[(0, 1), (1, 1)], &[(2, 1), (3, 2)], &[(4, 1), (5, 1)]];
        (0..30)
            .map(|i| SentenceVector::from_pairs(patterns[i % 3].to_vec()).unwrap())
            .collect()
    }

    fn tiny_config(model: ModelKind) -> NetConfig {
        let mut c = NetConfig::new(model, vec![4, 2]);
        c.epochs_pretrain = 5;
        c.epochs_finetune = 5;
        c.pretrain.batch_size = 10;
        c.finetune.batch_size = 10;
        c
    }

    #[test]
    fn zero_learning_rate_leaves_net_unchanged() {
        let mut c = tiny_config(ModelKind::Bda);
        c.finetune.lr = 0.0;
        let out = train_autoencoder(&c, 6, &tiny_corpus(), false).unwrap();
        let ft = out.finetuned.unwrap();
        assert_eq!(ft.encoder, out.pretrained.encoder);
        assert_eq!(ft.decoder, out.pretrained.decoder);
        assert_eq!(ft.phase, Phase::Finetuned);
    }

    #[test]
    fn single_layer_stack_equals_one_rbm() {
        let mut c = tiny_config(ModelKind::Bda);
        c.layer_sizes = vec![3];
        let data = tiny_corpus();
        let out = pretrain_stack(&c, 6, &data, &mut rng_from_seed(5)).unwrap();

        let mut rng = rng_from_seed(5);
        let mut rbm =
            RbmParams::init_gaussian(6, 3, Flavor::BinaryBinary, c.pretrain.init_std, &mut rng);
        let rows = SparseRows::new(&data, 6, c.model.input_mode());
        train_rbm(
            &mut rbm,
            &rows,
            c.epochs_pretrain,
            &c.pretrain.rbm_hyper(true),
            &mut rng,
        )
        .unwrap();
        assert_eq!(out.stack, vec![rbm]);
    }

    #[test]
    fn training_is_deterministic() {
        for model in [ModelKind::Bda, ModelKind::Rsda] {
            let c = tiny_config(model);
            let a = train_autoencoder(&c, 6, &tiny_corpus(), false).unwrap();
            let b = train_autoencoder(&c, 6, &tiny_corpus(), false).unwrap();
            assert_eq!(a.final_net(), b.final_net());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = tiny_config(ModelKind::Bda);
        assert!(matches!(
            train_autoencoder(&c, 6, &[SentenceVector::empty()], false),
            Err(Error::EmptyTrainingSet)
        ));
        assert!(matches!(
            train_autoencoder(&c, 4, &tiny_corpus(), false),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn batch_loss_is_sum_of_per_sentence_cross_entropy() {
        let out =
            train_autoencoder(&tiny_config(ModelKind::Rsda), 6, &tiny_corpus(), true).unwrap();
        let net = out.final_net();
        let data = tiny_corpus();
        let rows = net.input_rows(&data[..3]).unwrap().gather_all();
        let total = net.batch_loss(rows.view()).unwrap();
        let mut manual = 0.0;
        for v in &data[..3] {
            let d = v.length() as f64;
            let target: Vec<f64> = v
                .to_dense(6, ModelKind::Rsda.input_mode())
                .iter()
                .map(|c| c / d)
                .collect();
            let recon = net.reconstruct(v).unwrap();
            manual += cross_entropy(&target, recon.as_slice().unwrap(), ModelKind::Rsda).unwrap();
        }
        assert!((total - manual).abs() < 1e-12);
    }

    #[test]
    fn divergence_restores_checkpoint() {
        let out = train_autoencoder(&tiny_config(ModelKind::Bda), 6, &tiny_corpus(), true).unwrap();
        let mut net = out.pretrained.clone();
        let hyper = FineTuneHyper {
            lr: 1e308,
            momentum: 0.0,
            batch_size: 10,
        };
        let r = net.fine_tune(&tiny_corpus(), &hyper, 3, &mut rng_from_seed(0));
        assert!(matches!(r, Err(Error::NonFiniteUpdate { epoch: 0, .. })));
        assert_eq!(net, out.pretrained);
    }
}
