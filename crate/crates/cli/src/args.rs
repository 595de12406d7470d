use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use textae::autoencoder::ModelKind;
use textae::bottleneck::PercentDiff;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "textae",
    version,
    about = "Deep autoencoders for sentence bag-of-words vectors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize a corpus, build the vocabulary and write sparse vectors.
    Preprocess(PreprocessArgs),
    /// Pretrain and fine-tune an autoencoder.
    Train(TrainArgs),
    /// Compute RC, SPI, SAI and the cosine histogram for a model.
    Evaluate(EvaluateArgs),
    /// Train one model per bottleneck width and locate the critical one.
    Sweep(SweepArgs),
    /// Run the critical-dimension detector on an existing curve.
    CriticalDim(CriticalDimArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed for all randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub common: Common,
    /// Training corpus, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Separate test corpus. Without it a seeded random fraction of the
    /// input is held out.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, conflicts_with = "test")]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub min_df: Option<u32>,
    #[arg(long)]
    pub min_len: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelKind>,
    /// Bottleneck width.
    #[arg(long)]
    pub m: Option<usize>,
    /// Hidden widths below the bottleneck, e.g. 500,250,250.
    #[arg(long, value_delimiter = ',')]
    pub layers: Option<Vec<usize>>,
    #[arg(long)]
    pub epochs_pretrain: Option<usize>,
    #[arg(long)]
    pub epochs_finetune: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Directory written by `preprocess`.
    #[arg(long)]
    pub data: PathBuf,
    /// Stop after pretraining; the saved model is the unrolled stack.
    #[arg(long)]
    pub skip_finetune: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Model file written by `train`.
    #[arg(long = "model")]
    pub model_path: PathBuf,
    /// Directory written by `preprocess`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    pub split: Split,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_parser = parse_percent_diff)]
    pub percent_diff: Option<PercentDiff>,
    #[arg(long)]
    pub min_steepness: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Directory written by `preprocess`.
    #[arg(long, required_unless_present = "spi_csv")]
    pub data: Option<PathBuf>,
    /// Bottleneck widths, ascending.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Parallel trainings (0 = one per core).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Skip training and run only the detector on this `m,spi` curve.
    #[arg(long, conflicts_with = "data")]
    pub spi_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CriticalDimArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// CSV with an `m` column and a `spi` column (e.g. a sweep CSV).
    #[arg(long)]
    pub input: PathBuf,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: textae::Error| e.to_string())
}

fn parse_percent_diff(s: &str) -> Result<PercentDiff, String> {
    match s {
        "relative-to-previous" => Ok(PercentDiff::RelativeToPrevious),
        "symmetric-mean" => Ok(PercentDiff::SymmetricMean),
        _ => Err(format!(
            "unknown mode {s:?} (expected relative-to-previous or symmetric-mean)"
        )),
    }
}

impl Common {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
    }
}

impl ModelArgs {
    pub fn apply(&self, config: &mut RunConfig) {
        let m = &mut config.model;
        if let Some(k) = self.model {
            m.kind = k;
        }
        if let Some(v) = self.m {
            m.m = v;
        }
        if let Some(v) = &self.layers {
            m.layers = v.clone();
        }
        if let Some(v) = self.epochs_pretrain {
            m.epochs_pretrain = v;
        }
        if let Some(v) = self.epochs_finetune {
            m.epochs_finetune = v;
        }
    }
}

impl DetectorArgs {
    pub fn apply(&self, config: &mut RunConfig) {
        let s = &mut config.sweep;
        if let Some(v) = self.tau {
            s.tau = v;
        }
        if let Some(v) = self.percent_diff {
            s.percent_diff = v;
        }
        if let Some(v) = self.min_steepness {
            s.min_steepness = v;
        }
    }
}
