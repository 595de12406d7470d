//! Restricted Boltzmann machines: the stochastic binary flavor and the
//! replicated-softmax flavor for word counts, trained with CD-1.
//!
//! Conventions: `weights` is `n_visible × n_hidden`, `vis_bias` is the visible
//! bias (a) and `hid_bias` the hidden bias (b) for both flavors.
//!
//! Binary flavor:
//!   E(v,h) = -Σ a_i v_i - Σ b_j h_j - Σ v_i h_j w_ij
//!   p(h_j=1|v) = σ(b_j + Σ_i v_i w_ij),  p(v_i=1|h) = σ(a_i + Σ_j h_j w_ij)
//!
//! Replicated softmax over a count vector v̂ with length D = Σ v̂:
//!   E(v̂,h) = -Σ_k v̂_k a_k - D Σ_j b_j h_j - Σ_kj w_kj h_j v̂_k
//!   p(h_j=1|v̂) = σ(D b_j + Σ_k v̂_k w_kj)
//!   p(word = k|h) = softmax_k(a_k + Σ_j h_j w_kj), drawn D times.

use std::io::{Read, Write};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rows::RowSource;
use crate::util::{sigmoid, softmax_in_place};

const MAGIC: &[u8; 4] = b"RBMP";
const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    BinaryBinary,
    ReplicatedSoftmax,
}

impl Flavor {
    fn tag(self) -> u8 {
        match self {
            Flavor::BinaryBinary => 0,
            Flavor::ReplicatedSoftmax => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Flavor::BinaryBinary),
            1 => Ok(Flavor::ReplicatedSoftmax),
            t => Err(Error::format(
                "rbm block",
                format!("unknown flavor tag {t}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbmParams {
    pub weights: Array2<f64>,
    pub vis_bias: Array1<f64>,
    pub hid_bias: Array1<f64>,
    pub flavor: Flavor,
}

/// Telemetry for one CD-1 step or one epoch of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdStats {
    pub epoch: usize,
    /// Mean squared distance between data and its one-step reconstruction.
    pub mean_recon_error: f64,
    /// Frobenius norm of the weight gradient.
    pub gradient_norm: f64,
}

/// Batch-averaged CD-1 gradient (ascent direction on the log-likelihood).
#[derive(Debug, Clone)]
pub struct CdGradient {
    pub weights: Array2<f64>,
    pub vis_bias: Array1<f64>,
    pub hid_bias: Array1<f64>,
    /// ⟨v hᵀ⟩ over the data alone.
    pub positive_weights: Array2<f64>,
    pub mean_recon_error: f64,
}

/// Momentum buffers matching an [`RbmParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity {
    pub weights: Array2<f64>,
    pub vis_bias: Array1<f64>,
    pub hid_bias: Array1<f64>,
}

impl Velocity {
    pub fn zeros_like(p: &RbmParams) -> Self {
        Self {
            weights: Array2::zeros(p.weights.raw_dim()),
            vis_bias: Array1::zeros(p.vis_bias.len()),
            hid_bias: Array1::zeros(p.hid_bias.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdStep {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbmHyper {
    pub lr: f64,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// Epochs (from 0) before this one use `initial_momentum`.
    pub momentum_switch_epoch: usize,
    pub weight_decay: f64,
    pub batch_size: usize,
}

impl RbmHyper {
    pub fn for_flavor(flavor: Flavor) -> Self {
        Self {
            lr: match flavor {
                Flavor::BinaryBinary => 0.05,
                Flavor::ReplicatedSoftmax => 0.001,
            },
            initial_momentum: 0.5,
            final_momentum: 0.9,
            momentum_switch_epoch: 5,
            weight_decay: 2e-4,
            batch_size: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lr.is_finite()
            && self.lr >= 0.0
            && (0.0..1.0).contains(&self.initial_momentum)
            && (0.0..1.0).contains(&self.final_momentum)
            && self.weight_decay.is_finite()
            && self.weight_decay >= 0.0
            && self.batch_size >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "bad RBM hyperparameters {self:?}"
            )))
        }
    }

    pub fn momentum_at(&self, epoch: usize) -> f64 {
        if epoch < self.momentum_switch_epoch {
            self.initial_momentum
        } else {
            self.final_momentum
        }
    }
}

impl RbmParams {
    /// All-zero parameters.
    pub fn zeros(n_visible: usize, n_hidden: usize, flavor: Flavor) -> Self {
        Self {
            weights: Array2::zeros((n_visible, n_hidden)),
            vis_bias: Array1::zeros(n_visible),
            hid_bias: Array1::zeros(n_hidden),
            flavor,
        }
    }

    /// Gaussian weights with the given standard deviation, zero biases.
    pub fn init_gaussian<R: Rng + ?Sized>(
        n_visible: usize,
        n_hidden: usize,
        flavor: Flavor,
        std_dev: f64,
        rng: &mut R,
    ) -> Self {
        let normal = Normal::new(0.0, std_dev).expect("standard deviation must be finite and >= 0");
        let weights = Array2::from_shape_simple_fn((n_visible, n_hidden), || normal.sample(rng));
        Self {
            weights,
            ..Self::zeros(n_visible, n_hidden, flavor)
        }
    }

    pub fn from_parts(
        weights: Array2<f64>,
        vis_bias: Array1<f64>,
        hid_bias: Array1<f64>,
        flavor: Flavor,
    ) -> Result<Self> {
        check_dim("visible bias", weights.nrows(), vis_bias.len())?;
        check_dim("hidden bias", weights.ncols(), hid_bias.len())?;
        Ok(Self {
            weights,
            vis_bias,
            hid_bias,
            flavor,
        })
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|x| x.is_finite())
            && self.vis_bias.iter().all(|x| x.is_finite())
            && self.hid_bias.iter().all(|x| x.is_finite())
    }

    fn require(&self, flavor: Flavor) -> Result<()> {
        if self.flavor == flavor {
            Ok(())
        } else {
            Err(Error::WrongFlavor {
                expected: match flavor {
                    Flavor::BinaryBinary => "binary",
                    Flavor::ReplicatedSoftmax => "replicated-softmax",
                },
            })
        }
    }

    pub fn energy_binary(&self, v: &[f64], h: &[f64]) -> Result<f64> {
        self.require(Flavor::BinaryBinary)?;
        check_dim("visible state", self.n_visible(), v.len())?;
        check_dim("hidden state", self.n_hidden(), h.len())?;
        let v = ArrayView1::from(v);
        let h = ArrayView1::from(h);
        Ok(-v.dot(&self.vis_bias) - h.dot(&self.hid_bias) - v.dot(&self.weights).dot(&h))
    }

    pub fn energy_rsm(&self, counts: &[f64], length: f64, h: &[f64]) -> Result<f64> {
        self.require(Flavor::ReplicatedSoftmax)?;
        check_dim("count vector", self.n_visible(), counts.len())?;
        check_dim("hidden state", self.n_hidden(), h.len())?;
        let actual: f64 = counts.iter().sum();
        if (actual - length).abs() > 1e-9 {
            return Err(Error::InvalidLength {
                declared: length,
                actual,
            });
        }
        let v = ArrayView1::from(counts);
        let h = ArrayView1::from(h);
        Ok(-v.dot(&self.vis_bias) - length * h.dot(&self.hid_bias) - v.dot(&self.weights).dot(&h))
    }

    /// Input to the hidden sigmoid. The replicated-softmax flavor scales the
    /// hidden bias by the document length D = Σ v.
    pub fn hidden_preactivation(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        check_dim("visible state", self.n_visible(), v.len())?;
        let scale = match self.flavor {
            Flavor::BinaryBinary => 1.0,
            Flavor::ReplicatedSoftmax => v.sum(),
        };
        Ok(v.dot(&self.weights) + &(&self.hid_bias * scale))
    }

    pub fn hidden_probs(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.hidden_preactivation(v)?.mapv_into(sigmoid))
    }

    /// Row-wise [`hidden_probs`](Self::hidden_probs) over a batch.
    pub fn hidden_probs_batch(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_dim("visible batch width", self.n_visible(), v.ncols())?;
        let mut pre = v.dot(&self.weights);
        match self.flavor {
            Flavor::BinaryBinary => pre += &self.hid_bias,
            Flavor::ReplicatedSoftmax => {
                let lengths = v.sum_axis(Axis(1));
                Zip::from(pre.rows_mut())
                    .and(&lengths)
                    .for_each(|mut row, &d| {
                        row.scaled_add(d, &self.hid_bias);
                    });
            }
        }
        pre.mapv_inplace(sigmoid);
        Ok(pre)
    }

    pub fn visible_probs_binary(&self, h: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.require(Flavor::BinaryBinary)?;
        check_dim("hidden state", self.n_hidden(), h.len())?;
        Ok((self.weights.dot(&h) + &self.vis_bias).mapv_into(sigmoid))
    }

    pub fn visible_softmax_rsm(&self, h: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.require(Flavor::ReplicatedSoftmax)?;
        check_dim("hidden state", self.n_hidden(), h.len())?;
        let mut z = self.weights.dot(&h) + &self.vis_bias;
        softmax_in_place(z.as_slice_mut().expect("fresh array is contiguous"));
        Ok(z)
    }

    /// Row-wise visible conditionals: sigmoid means for the binary flavor,
    /// softmax word distributions for replicated softmax.
    pub fn visible_probs_batch(&self, h: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_dim("hidden batch width", self.n_hidden(), h.ncols())?;
        let mut pre = h.dot(&self.weights.t()) + &self.vis_bias;
        match self.flavor {
            Flavor::BinaryBinary => pre.mapv_inplace(sigmoid),
            Flavor::ReplicatedSoftmax => {
                for mut row in pre.rows_mut() {
                    softmax_in_place(row.as_slice_mut().expect("row of standard layout array"));
                }
            }
        }
        Ok(pre)
    }

    /// One step of alternating Gibbs sampling from the data, returning the
    /// batch-averaged gradient. Hidden units are sampled once; the binary
    /// flavor reconstructs with visible probabilities, replicated softmax
    /// draws D words from the softmax. Final statistics use probabilities.
    pub fn cd1_gradient<R: Rng + ?Sized>(
        &self,
        batch: ArrayView2<f64>,
        rng: &mut R,
    ) -> Result<CdGradient> {
        check_dim("visible batch width", self.n_visible(), batch.ncols())?;
        let b = batch.nrows();
        if b == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let ph0 = self.hidden_probs_batch(batch)?;
        let h0 = ph0.mapv(|p| if rng.random::<f64>() < p { 1.0 } else { 0.0 });
        let pv1 = self.visible_probs_batch(h0.view())?;
        let v1 = match self.flavor {
            Flavor::BinaryBinary => pv1,
            Flavor::ReplicatedSoftmax => {
                let mut v1 = Array2::zeros(pv1.raw_dim());
                for ((probs, data), mut out) in
                    pv1.rows().into_iter().zip(batch.rows()).zip(v1.rows_mut())
                {
                    let total = data.sum();
                    let d = total.round();
                    if (total - d).abs() > 1e-9 || d < 0.0 {
                        return Err(Error::InvalidLength {
                            declared: d,
                            actual: total,
                        });
                    }
                    let probs = probs.as_slice().expect("row of standard layout array");
                    let counts = sample_visible_multinomial(probs, d as u32, rng)?;
                    for (o, c) in out.iter_mut().zip(counts) {
                        *o = c as f64;
                    }
                }
                v1
            }
        };
        let ph1 = self.hidden_probs_batch(v1.view())?;

        let inv = 1.0 / b as f64;
        let positive = batch.t().dot(&ph0) * inv;
        let negative = v1.t().dot(&ph1) * inv;
        let weights = &positive - &negative;
        let vis_bias = (&batch - &v1).sum_axis(Axis(0)) * inv;
        let hid_bias = match self.flavor {
            Flavor::BinaryBinary => (&ph0 - &ph1).sum_axis(Axis(0)) * inv,
            Flavor::ReplicatedSoftmax => {
                // d(-E)/db_j = D h_j
                let lengths = batch.sum_axis(Axis(1)).insert_axis(Axis(1));
                ((&ph0 - &ph1) * &lengths).sum_axis(Axis(0)) * inv
            }
        };
        let mean_recon_error = (&batch - &v1).mapv(|x| x * x).sum() * inv;
        Ok(CdGradient {
            weights,
            vis_bias,
            hid_bias,
            positive_weights: positive,
            mean_recon_error,
        })
    }

    /// Applies one CD-1 momentum step in place. Weight decay acts on the
    /// weights only. On a non-finite result the parameters are restored and
    /// `NonFiniteUpdate` is returned.
    pub fn cd1_update<R: Rng + ?Sized>(
        &mut self,
        batch: ArrayView2<f64>,
        step: &CdStep,
        velocity: &mut Velocity,
        rng: &mut R,
    ) -> Result<CdStats> {
        let g = self.cd1_gradient(batch, rng)?;
        let backup = self.clone();
        let backup_velocity = velocity.clone();

        velocity.weights *= step.momentum;
        velocity.weights.scaled_add(
            step.lr,
            &(&g.weights - &(&self.weights * step.weight_decay)),
        );
        velocity.vis_bias *= step.momentum;
        velocity.vis_bias.scaled_add(step.lr, &g.vis_bias);
        velocity.hid_bias *= step.momentum;
        velocity.hid_bias.scaled_add(step.lr, &g.hid_bias);

        self.weights += &velocity.weights;
        self.vis_bias += &velocity.vis_bias;
        self.hid_bias += &velocity.hid_bias;

        if !self.is_finite() {
            *self = backup;
            *velocity = backup_velocity;
            return Err(Error::NonFiniteUpdate {
                stage: "pretraining",
                epoch: 0,
            });
        }
        Ok(CdStats {
            epoch: 0,
            mean_recon_error: g.mean_recon_error,
            gradient_norm: g.weights.iter().map(|x| x * x).sum::<f64>().sqrt(),
        })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[FORMAT_VERSION, self.flavor.tag()])?;
        w.write_all(&(self.n_visible() as u64).to_le_bytes())?;
        w.write_all(&(self.n_hidden() as u64).to_le_bytes())?;
        for x in self
            .weights
            .iter()
            .chain(&self.vis_bias)
            .chain(&self.hid_bias)
        {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(22 + 8 * (self.weights.len() + self.n_visible() + self.n_hidden()));
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::format("rbm block", "bad magic"));
        }
        let mut vf = [0u8; 2];
        read_exact(r, &mut vf)?;
        if vf[0] != FORMAT_VERSION {
            return Err(Error::format(
                "rbm block",
                format!("unsupported version {}", vf[0]),
            ));
        }
        let flavor = Flavor::from_tag(vf[1])?;
        let n_vis = read_u64(r)? as usize;
        let n_hid = read_u64(r)? as usize;
        let weights = Array2::from_shape_vec((n_vis, n_hid), read_f64s(r, n_vis * n_hid)?)
            .map_err(|e| Error::format("rbm block", e.to_string()))?;
        let vis_bias = Array1::from(read_f64s(r, n_vis)?);
        let hid_bias = Array1::from(read_f64s(r, n_hid)?);
        Self::from_parts(weights, vis_bias, hid_bias, flavor)
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        Self::read_from(&mut bytes)
    }
}

pub(crate) fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::format("binary block", format!("truncated input: {e}")))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    // Cap the up-front allocation so a corrupt length cannot exhaust memory.
    let mut out = Vec::with_capacity(n.min(1 << 20));
    let mut b = [0u8; 8];
    for _ in 0..n {
        read_exact(r, &mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}

/// Draws `d` words independently from `probs` and returns per-word counts.
pub fn sample_visible_multinomial<R: Rng + ?Sized>(
    probs: &[f64],
    d: u32,
    rng: &mut R,
) -> Result<Vec<u32>> {
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidDistribution(format!(
            "entry {p} is not a non-negative number"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    let mut counts = vec![0u32; probs.len()];
    if d == 0 {
        return Ok(counts);
    }
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let last_support = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for _ in 0..d {
        let u = rng.random::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(last_support);
        counts[k] += 1;
    }
    Ok(counts)
}

/// Trains with CD-1 over minibatches for `epochs` passes. Rows are shuffled
/// each epoch when there is more than one batch. Returns per-epoch stats.
pub fn train_rbm<R: Rng + ?Sized>(
    params: &mut RbmParams,
    data: &dyn RowSource,
    epochs: usize,
    hyper: &RbmHyper,
    rng: &mut R,
) -> Result<Vec<CdStats>> {
    hyper.validate()?;
    if epochs == 0 {
        return Err(Error::InvalidConfig(
            "pretraining needs at least one epoch".into(),
        ));
    }
    check_dim("training data width", params.n_visible(), data.n_cols())?;
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut velocity = Velocity::zeros_like(params);
    let mut log = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        if n > hyper.batch_size {
            order.shuffle(rng);
        }
        let step = CdStep {
            lr: hyper.lr,
            momentum: hyper.momentum_at(epoch),
            weight_decay: hyper.weight_decay,
        };
        let (mut err_sum, mut norm_sum, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(hyper.batch_size) {
            let batch = data.gather(chunk);
            let stats = params
                .cd1_update(batch.view(), &step, &mut velocity, rng)
                .map_err(|e| match e {
                    Error::NonFiniteUpdate { stage, .. } => Error::NonFiniteUpdate { stage, epoch },
                    other => other,
                })?;
            err_sum += stats.mean_recon_error * chunk.len() as f64;
            norm_sum += stats.gradient_norm;
            batches += 1;
        }
        log.push(CdStats {
            epoch,
            mean_recon_error: err_sum / n as f64,
            gradient_norm: norm_sum / batches as f64,
        });
    }
    Ok(log)
}
