//! Run configuration: a TOML file whose every key is optional, overridden
//! by command-line flags, and written back fully resolved next to each
//! command's outputs.
//!
//! ```toml
//! seed = 42
//!
//! [preprocess]
//! min_df = 5
//! min_len = 3
//! stemmer = "porter"        # or "none"
//! test_fraction = 0.1       # used when no separate test file is given
//!
//! [model]
//! kind = "bda"              # or "rsda"
//! layers = [500, 250, 250]  # hidden widths below the bottleneck
//! m = 40                    # bottleneck width
//! epochs_pretrain = 50
//! epochs_finetune = 50
//!
//! [pretrain]                # defaults depend on model.kind
//! lr_bottom = 0.05
//! batch_size = 100
//!
//! [finetune]
//! lr = 0.1
//!
//! [evaluate]
//! bins = 20
//!
//! [sweep]
//! dims = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]
//! jobs = 0                  # 0 = one worker per core
//! tau = 0.8
//! percent_diff = "relative-to-previous"   # or "symmetric-mean"
//! min_steepness = 1e-6
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use textae::autoencoder::{FineTuneHyper, ModelKind, NetConfig, PretrainHyper};
use textae::bottleneck::{
    default_dims, DetectorConfig, PercentDiff, DEFAULT_MIN_STEEPNESS, DEFAULT_TAU,
};
use textae::corpus::{Stemmer, VocabFilter};
use textae::metrics::DEFAULT_BINS;
use textae::util::read_to_string;
use textae::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const SNAPSHOT_FILE: &str = "config.resolved.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub preprocess: PreprocessSection,
    pub model: ModelSection,
    pub pretrain: PretrainSection,
    pub finetune: FinetuneSection,
    pub evaluate: EvaluateSection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            preprocess: PreprocessSection::default(),
            model: ModelSection::default(),
            pretrain: PretrainSection::default(),
            finetune: FinetuneSection::default(),
            evaluate: EvaluateSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub min_df: u32,
    pub min_len: usize,
    pub stemmer: Stemmer,
    pub test_fraction: f64,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        let f = VocabFilter::default();
        Self {
            min_df: f.min_df,
            min_len: f.min_len,
            stemmer: Stemmer::Porter,
            test_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub layers: Vec<usize>,
    pub m: usize,
    pub epochs_pretrain: usize,
    pub epochs_finetune: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Bda,
            layers: vec![500, 250, 250],
            m: 40,
            epochs_pretrain: 50,
            epochs_finetune: 50,
        }
    }
}

/// Unset keys take the model's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PretrainSection {
    pub lr_bottom: Option<f64>,
    pub lr_upper: Option<f64>,
    pub initial_momentum: Option<f64>,
    pub final_momentum: Option<f64>,
    pub momentum_switch_epoch: Option<usize>,
    pub weight_decay: Option<f64>,
    pub batch_size: Option<usize>,
    pub init_std: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinetuneSection {
    pub lr: Option<f64>,
    pub momentum: Option<f64>,
    pub batch_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub bins: usize,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub dims: Vec<usize>,
    pub jobs: usize,
    pub tau: f64,
    pub percent_diff: PercentDiff,
    pub min_steepness: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            dims: default_dims(),
            jobs: 0,
            tau: DEFAULT_TAU,
            percent_diff: PercentDiff::default(),
            min_steepness: DEFAULT_MIN_STEEPNESS,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Self::parse(&text)
    }

    /// Loads `path` when given, otherwise the defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn vocab_filter(&self) -> VocabFilter {
        VocabFilter {
            min_df: self.preprocess.min_df,
            min_len: self.preprocess.min_len,
        }
    }

    pub fn pretrain_hyper(&self) -> PretrainHyper {
        let d = PretrainHyper::for_model(self.model.kind);
        let p = &self.pretrain;
        PretrainHyper {
            lr_bottom: p.lr_bottom.unwrap_or(d.lr_bottom),
            lr_upper: p.lr_upper.unwrap_or(d.lr_upper),
            initial_momentum: p.initial_momentum.unwrap_or(d.initial_momentum),
            final_momentum: p.final_momentum.unwrap_or(d.final_momentum),
            momentum_switch_epoch: p.momentum_switch_epoch.unwrap_or(d.momentum_switch_epoch),
            weight_decay: p.weight_decay.unwrap_or(d.weight_decay),
            batch_size: p.batch_size.unwrap_or(d.batch_size),
            init_std: p.init_std.unwrap_or(d.init_std),
        }
    }

    pub fn finetune_hyper(&self) -> FineTuneHyper {
        let d = FineTuneHyper::for_model(self.model.kind);
        let f = &self.finetune;
        FineTuneHyper {
            lr: f.lr.unwrap_or(d.lr),
            momentum: f.momentum.unwrap_or(d.momentum),
            batch_size: f.batch_size.unwrap_or(d.batch_size),
        }
    }

    /// Network configuration: `model.layers` followed by the bottleneck.
    pub fn net_config(&self) -> Result<NetConfig> {
        let mut sizes = self.model.layers.clone();
        sizes.push(self.model.m);
        let mut c = NetConfig::new(self.model.kind, sizes);
        c.epochs_pretrain = self.model.epochs_pretrain;
        c.epochs_finetune = self.model.epochs_finetune;
        c.seed = self.seed;
        c.pretrain = self.pretrain_hyper();
        c.finetune = self.finetune_hyper();
        c.validate()?;
        Ok(c)
    }

    pub fn detector(&self) -> DetectorConfig {
        DetectorConfig {
            tau: self.sweep.tau,
            percent_diff: self.sweep.percent_diff,
            min_steepness: self.sweep.min_steepness,
        }
    }

    /// Copy with every model-dependent default filled in.
    pub fn resolved(&self) -> Self {
        let p = self.pretrain_hyper();
        let f = self.finetune_hyper();
        let mut out = self.clone();
        out.pretrain = PretrainSection {
            lr_bottom: Some(p.lr_bottom),
            lr_upper: Some(p.lr_upper),
            initial_momentum: Some(p.initial_momentum),
            final_momentum: Some(p.final_momentum),
            momentum_switch_epoch: Some(p.momentum_switch_epoch),
            weight_decay: Some(p.weight_decay),
            batch_size: Some(p.batch_size),
            init_std: Some(p.init_std),
        };
        out.finetune = FinetuneSection {
            lr: Some(f.lr),
            momentum: Some(f.momentum),
            batch_size: Some(f.batch_size),
        };
        out
    }
}

#[derive(Serialize)]
struct Snapshot<'a> {
    seed: u64,
    run: RunInfo<'a>,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct RunInfo<'a> {
    command: &'a str,
    inputs: &'a BTreeMap<String, String>,
}

/// The resolved configuration of one command invocation as TOML. The
/// `[config]` table can be fed back through `--config` after removing the
/// `config.` prefix, i.e. it has the same layout as a config file.
pub fn snapshot_toml(
    command: &str,
    inputs: &BTreeMap<String, String>,
    config: &RunConfig,
) -> String {
    let resolved = config.resolved();
    let snap = Snapshot {
        seed: resolved.seed,
        run: RunInfo { command, inputs },
        config: &resolved,
    };
    toml::to_string(&snap).expect("snapshot serializes")
}

/// Extracts the `[config]` table of a snapshot as a run configuration.
pub fn config_from_snapshot(text: &str) -> Result<RunConfig> {
    #[derive(Deserialize)]
    struct Wrapper {
        config: RunConfig,
    }
    let w: Wrapper =
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("snapshot: {e}")))?;
    Ok(w.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.seed, 42);
        assert_eq!(c.net_config().unwrap().layer_sizes, vec![500, 250, 250, 40]);
    }

    #[test]
    fn model_dependent_defaults_follow_kind() {
        let c = RunConfig::parse("[model]\nkind = \"rsda\"\n[finetune]\nbatch_size = 7\n").unwrap();
        let n = c.net_config().unwrap();
        assert_eq!(n.pretrain.lr_bottom, 0.001);
        assert_eq!(n.finetune.lr, 0.01);
        assert_eq!(n.finetune.batch_size, 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[model]\nkindd = \"bda\"\n").is_err());
        assert!(RunConfig::parse("[model]\nkind = \"xyz\"\n").is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let mut c = RunConfig::default();
        c.model.kind = ModelKind::Rsda;
        c.sweep.dims = vec![2, 4, 8];
        let mut inputs = BTreeMap::new();
        inputs.insert("data".to_string(), "out/data".to_string());
        let text = snapshot_toml("train", &inputs, &c);
        assert!(text.starts_with("seed = 42\n"));
        assert!(text.contains("command = \"train\""));
        let back = config_from_snapshot(&text).unwrap();
        assert_eq!(back, c.resolved());
        assert_eq!(back.net_config().unwrap(), c.net_config().unwrap());
    }
}
