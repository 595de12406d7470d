//! Reconstruction quality metrics.
//!
//! With `D_ij` the cosine similarity between inputs `i` and `j` and `D̂_ij`
//! the same for their reconstructions:
//!
//! - SPI (structure preservation index): `(1/p²) Σ_ij (D_ij − D̂_ij)²`, with
//!   both diagonals fixed at 1. Zero when pairwise structure is preserved.
//! - SAI (similarity accumulation index): mean of `cos(x_i, x̂_i)`. One for a
//!   perfect reconstruction.
//! - RC: mean per-sentence reconstruction cross-entropy, in the model's own
//!   loss convention (not comparable across model kinds).
//!
//! Matrices hold one vector per row. Cosine with a zero vector is 0.

use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoencoder::{cross_entropy_unchecked, AutoencoderNet, ModelKind, Phase};
use crate::corpus::SentenceVector;
use crate::error::{check_dim, Error, Result};

pub const DEFAULT_BINS: usize = 20;
/// Cosine threshold reported as the fraction of poorly reconstructed
/// sentences.
pub const LOW_COSINE: f64 = 0.6;

const SPI_BLOCK: usize = 128;
const EVAL_CHUNK: usize = 1024;

fn cosine_view(u: ArrayView1<f64>, v: ArrayView1<f64>) -> f64 {
    let nu = u.dot(&u);
    let nv = v.dot(&v);
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    // sqrt(nu * nv) rather than the product of norms keeps cos(x, x) == 1.
    (u.dot(&v) / (nu * nv).sqrt()).clamp(-1.0, 1.0)
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim("cosine operand", u.len(), v.len())?;
    Ok(cosine_view(ArrayView1::from(u), ArrayView1::from(v)))
}

fn unit_rows(x: ArrayView2<f64>) -> Array2<f64> {
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

/// Pairwise cosine similarities with the diagonal fixed at 1.
pub fn similarity_matrix(x: ArrayView2<f64>) -> Array2<f64> {
    let p = x.nrows();
    let unit = unit_rows(x);
    let mut d = unit.dot(&unit.t());
    for i in 0..p {
        d[[i, i]] = 1.0;
        for j in i + 1..p {
            let c = d[[i, j]].clamp(-1.0, 1.0);
            d[[i, j]] = c;
            d[[j, i]] = c;
        }
    }
    d
}

fn check_pair(x: ArrayView2<f64>, x_hat: ArrayView2<f64>) -> Result<()> {
    check_dim("reconstruction count", x.nrows(), x_hat.nrows())?;
    check_dim("reconstruction width", x.ncols(), x_hat.ncols())
}

/// Structure preservation index. Rows are processed in parallel blocks and
/// the block sums are added in order, so the result is bit-stable.
pub fn spi(x: ArrayView2<f64>, x_hat: ArrayView2<f64>) -> Result<f64> {
    check_pair(x, x_hat)?;
    let p = x.nrows();
    if p == 0 {
        return Err(Error::EmptyEvaluationSet);
    }
    let a = unit_rows(x);
    let b = unit_rows(x_hat);
    let starts: Vec<usize> = (0..p).step_by(SPI_BLOCK).collect();
    let partial: Vec<f64> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + SPI_BLOCK).min(p);
            // Upper triangle only: columns from `start` on.
            let da = a
                .slice(s![start..end, ..])
                .dot(&a.slice(s![start.., ..]).t());
            let db = b
                .slice(s![start..end, ..])
                .dot(&b.slice(s![start.., ..]).t());
            let mut acc = 0.0;
            for r in 0..end - start {
                for c in r + 1..p - start {
                    let d = da[[r, c]].clamp(-1.0, 1.0) - db[[r, c]].clamp(-1.0, 1.0);
                    acc += d * d;
                }
            }
            acc
        })
        .collect();
    let total: f64 = partial.iter().sum();
    Ok(2.0 * total / (p as f64 * p as f64))
}

/// Per-row cosines between inputs and reconstructions, skipping rows whose
/// input is the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCosines {
    pub cosines: Vec<f64>,
    pub skipped_empty: usize,
}

pub fn row_cosines(x: ArrayView2<f64>, x_hat: ArrayView2<f64>) -> Result<RowCosines> {
    check_pair(x, x_hat)?;
    let mut cosines = Vec::with_capacity(x.nrows());
    let mut skipped_empty = 0;
    for (u, v) in x.outer_iter().zip(x_hat.outer_iter()) {
        if u.iter().all(|&a| a == 0.0) {
            skipped_empty += 1;
        } else {
            cosines.push(cosine_view(u, v));
        }
    }
    Ok(RowCosines {
        cosines,
        skipped_empty,
    })
}

/// Similarity accumulation index over the non-zero input rows.
pub fn sai(x: ArrayView2<f64>, x_hat: ArrayView2<f64>) -> Result<f64> {
    mean(&row_cosines(x, x_hat)?.cosines).ok_or(Error::EmptyEvaluationSet)
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Mean per-sentence cross-entropy of `net` on the non-empty sentences.
pub fn reconstruction_error(net: &AutoencoderNet, vectors: &[SentenceVector]) -> Result<f64> {
    let eval = EvalSet::new(net, vectors)?;
    Ok(eval.rc)
}

/// Fixed-width histogram over `[0, 1]`. Bins are closed on the left and
/// open on the right except the last, which includes 1. Values outside the
/// range are clamped into the end bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidConfig(
                "histogram needs at least one bin".into(),
            ));
        }
        let edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let idx = (v.clamp(0.0, 1.0) * bins as f64).floor() as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `bin_start,bin_end,count` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start,bin_end,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.edges[i], self.edges[i + 1], c));
        }
        out
    }
}

pub fn cosine_histogram(
    x: ArrayView2<f64>,
    x_hat: ArrayView2<f64>,
    bins: usize,
) -> Result<Histogram> {
    Histogram::from_values(&row_cosines(x, x_hat)?.cosines, bins)
}

pub fn fraction_at_most(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v <= threshold).count() as f64 / values.len() as f64
}

/// Inputs, reconstructions and RC for the non-empty sentences of a corpus.
struct EvalSet {
    x: Array2<f64>,
    x_hat: Array2<f64>,
    rc: f64,
    skipped_empty: usize,
}

impl EvalSet {
    fn new(net: &AutoencoderNet, vectors: &[SentenceVector]) -> Result<Self> {
        let kept: Vec<SentenceVector> = vectors.iter().filter(|v| !v.is_empty()).cloned().collect();
        let skipped_empty = vectors.len() - kept.len();
        if kept.is_empty() {
            return Err(Error::EmptyEvaluationSet);
        }
        let rows = net.input_rows(&kept)?;
        let x = crate::rows::RowSource::gather_all(&rows);
        let mut x_hat = Array2::zeros(x.raw_dim());
        for start in (0..x.nrows()).step_by(EVAL_CHUNK) {
            let end = (start + EVAL_CHUNK).min(x.nrows());
            let out = net.reconstruct_batch(x.slice(s![start..end, ..]))?;
            x_hat.slice_mut(s![start..end, ..]).assign(&out);
        }
        let targets = net.targets(x.view());
        let losses: Vec<f64> = targets
            .axis_iter(Axis(0))
            .zip(x_hat.axis_iter(Axis(0)))
            .map(|(t, o)| {
                cross_entropy_unchecked(
                    t.as_slice().expect("standard layout"),
                    o.as_slice().expect("standard layout"),
                    net.model,
                )
            })
            .collect();
        let rc = mean(&losses).expect("non-empty evaluation set");
        Ok(Self {
            x,
            x_hat,
            rc,
            skipped_empty,
        })
    }
}

/// All metrics for one model on one corpus split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: ModelKind,
    pub phase: Phase,
    pub m: usize,
    pub rc: f64,
    pub spi: f64,
    pub sai: f64,
    pub p: usize,
    pub skipped_empty: usize,
    pub fraction_cos_le_0_6: f64,
    pub histogram: Histogram,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format("metrics report", e.to_string()))
    }

    /// Scalar metrics as `metric,value` rows.
    pub fn to_csv(&self) -> String {
        format!(
            "metric,value\nmodel,{}\nphase,{}\nm,{}\nrc,{}\nspi,{}\nsai,{}\np,{}\nskipped_empty,{}\nfraction_cos_le_0_6,{}\n",
            self.model, self.phase, self.m, self.rc, self.spi, self.sai, self.p, self.skipped_empty, self.fraction_cos_le_0_6
        )
    }
}

/// Reconstructs every non-empty sentence and computes RC, SPI, SAI and the
/// cosine histogram. The reference vectors are the model's own inputs:
/// binary for bDA, raw counts for rsDA.
pub fn evaluate(
    net: &AutoencoderNet,
    vectors: &[SentenceVector],
    bins: usize,
) -> Result<MetricsReport> {
    let eval = EvalSet::new(net, vectors)?;
    let spi = spi(eval.x.view(), eval.x_hat.view())?;
    let cos = row_cosines(eval.x.view(), eval.x_hat.view())?;
    let histogram = Histogram::from_values(&cos.cosines, bins)?;
    Ok(MetricsReport {
        model: net.model,
        phase: net.phase,
        m: net.code_dim(),
        rc: eval.rc,
        spi,
        sai: mean(&cos.cosines).expect("non-empty evaluation set"),
        p: cos.cosines.len(),
        skipped_empty: eval.skipped_empty,
        fraction_cos_le_0_6: fraction_at_most(&cos.cosines, LOW_COSINE),
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(cosine(&[0.3, 0.7, 2.0], &[0.3, 0.7, 2.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn similarity_matrix_small_cases() {
        assert_eq!(similarity_matrix(array![[0.0, 0.0]].view()), array![[1.0]]);
        let d = similarity_matrix(array![[1.0, 2.0], [1.0, 2.0]].view());
        for v in d.iter() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn spi_hand_example() {
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        let x_hat = array![[1.0, 0.0], [1.0, 0.0]];
        assert!((spi(x.view(), x_hat.view()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(spi(x.view(), x.view()).unwrap(), 0.0);
    }

    #[test]
    fn spi_spans_several_blocks() {
        let p = 2 * SPI_BLOCK + 7;
        let x = Array2::from_shape_fn((p, 3), |(i, j)| ((i * 7 + j * 3) % 5) as f64);
        let x_hat = Array2::from_shape_fn((p, 3), |(i, j)| ((i + j) % 4) as f64 + 0.5);
        let d = similarity_matrix(x.view());
        let dh = similarity_matrix(x_hat.view());
        let expected = (&d - &dh).mapv(|v| v * v).sum() / (p * p) as f64;
        assert!((spi(x.view(), x_hat.view()).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn sai_skips_zero_inputs() {
        let x = array![[1.0, 0.0], [0.0, 0.0], [2.0, 2.0]];
        let x_hat = array![[0.0, 1.0], [0.5, 0.5], [1.0, 1.0]];
        let rc = row_cosines(x.view(), x_hat.view()).unwrap();
        assert_eq!(rc.skipped_empty, 1);
        assert_eq!(rc.cosines.len(), 2);
        assert!((sai(x.view(), x_hat.view()).unwrap() - 0.5).abs() < 1e-15);
        let zeros = Array2::<f64>::zeros((2, 2));
        assert!(matches!(
            sai(zeros.view(), x_hat.slice(s![..2, ..])),
            Err(Error::EmptyEvaluationSet)
        ));
    }

    #[test]
    fn histogram_binning() {
        let h = Histogram::from_values(&[0.0, 0.05, 0.049, 0.999, 1.0, 1.0 + 1e-16], 20).unwrap();
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[19], 3);
        assert_eq!(h.total(), 6);
        assert_eq!(h.edges.len(), 21);
        assert!(Histogram::from_values(&[], 0).is_err());
        assert!(h
            .to_csv()
            .starts_with("bin_start,bin_end,count\n0,0.05,2\n"));
    }

    #[test]
    fn fraction_threshold_is_inclusive() {
        assert_eq!(fraction_at_most(&[0.6, 0.61, 0.2, 0.9], 0.6), 0.5);
        assert_eq!(fraction_at_most(&[], 0.6), 0.0);
    }
}
