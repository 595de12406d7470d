//! One function per subcommand. Each returns the lines to print on stdout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use textae::autoencoder::{pretrain_stack, AutoencoderNet, ModelFile};
use textae::bottleneck::{detect, parse_spi_csv, sweep, CriticalDimReport, SweepOptions};
use textae::corpus::{
    format_vectors, format_vocabulary, parse_vectors, parse_vocabulary, CorpusSplit, Preprocessor,
    SentenceVector, Vocabulary,
};
use textae::metrics::evaluate;
use textae::util::{read_to_string, rng_from_seed, write_atomic};
use textae::{Error, Result};

use crate::args::{CriticalDimArgs, EvaluateArgs, PreprocessArgs, Split, SweepArgs, TrainArgs};
use crate::config::{snapshot_toml, RunConfig, SNAPSHOT_FILE};

pub const VOCAB_FILE: &str = "vocab.txt";
pub const TRAIN_VECTORS: &str = "train.vec";
pub const TEST_VECTORS: &str = "test.vec";
pub const STATS_FILE: &str = "stats.json";
pub const PRETRAINED_MODEL: &str = "model_pretrained.bin";
pub const MODEL_FILE: &str = "model.bin";
pub const TRAIN_LOG: &str = "train_log.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const HISTOGRAM_CSV: &str = "histogram.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const STEEPNESS_CSV: &str = "steepness.csv";
pub const CRITICAL_DIM_FILE: &str = "critical_dim.txt";
pub const SWEEP_CACHE_DIR: &str = "cache";

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    write_atomic(&dir.join(name), text.as_bytes())
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn write_snapshot(
    out: &Path,
    command: &str,
    inputs: &BTreeMap<String, String>,
    config: &RunConfig,
) -> Result<()> {
    write_text(out, SNAPSHOT_FILE, &snapshot_toml(command, inputs, config))
}

fn non_blank_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.trim().is_empty()).collect()
}

pub fn preprocess(args: &PreprocessArgs) -> Result<String> {
    let mut config = RunConfig::load_or_default(args.common.config.as_deref())?;
    args.common.apply(&mut config);
    if let Some(v) = args.min_df {
        config.preprocess.min_df = v;
    }
    if let Some(v) = args.min_len {
        config.preprocess.min_len = v;
    }
    if let Some(v) = args.test_fraction {
        config.preprocess.test_fraction = v;
    }
    let filter = config.vocab_filter();
    filter.validate()?;

    let input_text = read_to_string(&args.input)?;
    let mut inputs = BTreeMap::new();
    inputs.insert("input".to_string(), path_string(&args.input));
    let (train, test): (Vec<&str>, Vec<&str>);
    let test_text;
    match &args.test {
        Some(path) => {
            test_text = read_to_string(path)?;
            inputs.insert("test".to_string(), path_string(path));
            train = non_blank_lines(&input_text);
            test = non_blank_lines(&test_text);
        }
        None => {
            let f = config.preprocess.test_fraction;
            if !(0.0..1.0).contains(&f) {
                return Err(Error::InvalidConfig(format!(
                    "test fraction must lie in [0, 1), got {f}"
                )));
            }
            (train, test) = hold_out(&non_blank_lines(&input_text), f, config.seed);
        }
    }

    let pre = Preprocessor::new(
        textae::corpus::english_stopwords(),
        config.preprocess.stemmer,
    );
    let (split, stats) = CorpusSplit::from_sentences(&train, &test, &pre, &filter)?;

    let out = &args.common.out;
    write_text(out, VOCAB_FILE, &format_vocabulary(&split.vocabulary))?;
    write_text(out, TRAIN_VECTORS, &format_vectors(&split.train))?;
    write_text(out, TEST_VECTORS, &format_vectors(&split.test))?;
    let mut stats_json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    stats_json.push('\n');
    write_text(out, STATS_FILE, &stats_json)?;
    write_snapshot(out, "preprocess", &inputs, &config)?;

    Ok(format!(
        "vocab1={} vocab2={} train_sentences={} test_sentences={} train_empty={} test_empty={}\n",
        stats.vocab1_size,
        stats.vocab2_size,
        stats.train_sentences,
        stats.test_sentences,
        stats.train_empty,
        stats.test_empty
    ))
}

/// Holds out `round(fraction · n)` sentences chosen by a seeded shuffle;
/// both parts keep the input order.
fn hold_out<'a>(lines: &[&'a str], fraction: f64, seed: u64) -> (Vec<&'a str>, Vec<&'a str>) {
    let n_test = (fraction * lines.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..lines.len()).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut is_test = vec![false; lines.len()];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (line, t) in lines.iter().zip(is_test) {
        if t {
            test.push(*line);
        } else {
            train.push(*line);
        }
    }
    (train, test)
}

/// Vocabulary and the vectors of one split from a preprocess directory.
fn load_data(dir: &Path, split: Split) -> Result<(Vocabulary, Vec<SentenceVector>)> {
    let vocab = parse_vocabulary(&read_to_string(&dir.join(VOCAB_FILE))?)?;
    let name = match split {
        Split::Train => TRAIN_VECTORS,
        Split::Test => TEST_VECTORS,
    };
    let vectors = parse_vectors(&read_to_string(&dir.join(name))?, Some(vocab.len()))?;
    Ok((vocab, vectors))
}

pub fn train(args: &TrainArgs) -> Result<String> {
    let mut config = RunConfig::load_or_default(args.common.config.as_deref())?;
    args.common.apply(&mut config);
    args.model.apply(&mut config);
    let net_config = config.net_config()?;
    let (vocab, train) = load_data(&args.data, Split::Train)?;
    let out = &args.common.out;
    let mut inputs = BTreeMap::new();
    inputs.insert("data".to_string(), path_string(&args.data));
    inputs.insert("skip_finetune".to_string(), args.skip_finetune.to_string());
    write_snapshot(out, "train", &inputs, &config)?;

    let save = |net: &AutoencoderNet, name: &str| -> Result<PathBuf> {
        let path = out.join(name);
        ModelFile {
            net: net.clone(),
            seed: config.seed,
            vocab_fingerprint: vocab.fingerprint(),
        }
        .save(&path)?;
        Ok(path)
    };

    // Same random stream as `train_autoencoder`, with the pretrained
    // checkpoint written before fine-tuning starts.
    let mut rng = rng_from_seed(net_config.seed);
    let outcome = pretrain_stack(&net_config, vocab.len(), &train, &mut rng)?;
    let mut net = AutoencoderNet::unroll(net_config.model, outcome.stack)?;
    save(&net, PRETRAINED_MODEL)?;

    let mut log = String::from("stage,layer,epoch,loss\n");
    for (layer, stats) in outcome.logs.iter().enumerate() {
        for s in stats {
            writeln!(
                log,
                "pretrain,{},{},{}",
                layer + 1,
                s.epoch,
                s.mean_recon_error
            )
            .unwrap();
        }
    }
    let finetune = !args.skip_finetune && net_config.epochs_finetune > 0;
    let result = if finetune {
        net.fine_tune(
            &train,
            &net_config.finetune,
            net_config.epochs_finetune,
            &mut rng,
        )
    } else {
        Ok(Vec::new())
    };
    let epochs = match result {
        Ok(epochs) => epochs,
        Err(e) => {
            write_text(out, TRAIN_LOG, &log)?;
            return Err(e);
        }
    };
    for e in &epochs {
        writeln!(log, "finetune,0,{},{}", e.epoch, e.loss).unwrap();
    }
    write_text(out, TRAIN_LOG, &log)?;
    let path = save(&net, MODEL_FILE)?;
    Ok(format!(
        "model={} phase={} m={} final_loss={}\n",
        path.display(),
        net.phase,
        net.code_dim(),
        epochs
            .last()
            .map_or("none".to_string(), |e| e.loss.to_string())
    ))
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> Result<String> {
    let mut config = RunConfig::load_or_default(args.common.config.as_deref())?;
    args.common.apply(&mut config);
    if let Some(b) = args.bins {
        config.evaluate.bins = b;
    }
    let model = ModelFile::load(&args.model_path)?;
    let (vocab, vectors) = load_data(&args.data, args.split)?;
    if vocab.fingerprint() != model.vocab_fingerprint {
        return Err(Error::VocabularyMismatch {
            expected: model.vocab_fingerprint,
            got: vocab.fingerprint(),
        });
    }
    // Record what was actually evaluated rather than config-file guesses.
    config.seed = model.seed;
    config.model.kind = model.net.model;
    config.model.m = model.net.code_dim();
    let sizes = model.net.layer_sizes();
    config.model.layers = sizes[..sizes.len() - 1].to_vec();

    let report = evaluate(&model.net, &vectors, config.evaluate.bins)?;
    let out = &args.common.out;
    let mut inputs = BTreeMap::new();
    inputs.insert("model".to_string(), path_string(&args.model_path));
    inputs.insert("data".to_string(), path_string(&args.data));
    inputs.insert(
        "split".to_string(),
        match args.split {
            Split::Train => "train",
            Split::Test => "test",
        }
        .to_string(),
    );
    write_text(out, REPORT_JSON, &report.to_json())?;
    write_text(out, REPORT_CSV, &report.to_csv())?;
    write_text(out, HISTOGRAM_CSV, &report.histogram.to_csv())?;
    write_snapshot(out, "evaluate", &inputs, &config)?;
    Ok(format!(
        "model={} phase={} m={} rc={} spi={} sai={} p={} skipped_empty={}\n",
        report.model,
        report.phase,
        report.m,
        report.rc,
        report.spi,
        report.sai,
        report.p,
        report.skipped_empty
    ))
}

fn write_detection(out: &Path, report: &CriticalDimReport) -> Result<String> {
    write_text(out, STEEPNESS_CSV, &report.to_csv())?;
    let line = format!("{}\n", report.summary_line());
    write_text(out, CRITICAL_DIM_FILE, &line)?;
    Ok(line)
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<String> {
    let mut config = RunConfig::load_or_default(args.common.config.as_deref())?;
    args.common.apply(&mut config);
    args.model.apply(&mut config);
    args.detector.apply(&mut config);
    if let Some(d) = &args.dims {
        config.sweep.dims = d.clone();
    }
    if let Some(j) = args.jobs {
        config.sweep.jobs = j;
    }
    let out = &args.common.out;
    let mut inputs = BTreeMap::new();

    if let Some(csv) = &args.spi_csv {
        inputs.insert("spi_csv".to_string(), path_string(csv));
        let (dims, spi) = parse_spi_csv(&read_to_string(csv)?)?;
        config.sweep.dims = dims.clone();
        let report = detect(&dims, &spi, &config.detector())?;
        write_snapshot(out, "sweep", &inputs, &config)?;
        return write_detection(out, &report);
    }

    let data = args
        .data
        .as_ref()
        .expect("clap requires --data without --spi-csv");
    inputs.insert("data".to_string(), path_string(data));
    let net_config = config.net_config()?;
    let (vocab, train) = load_data(data, Split::Train)?;
    let (_, test) = load_data(data, Split::Test)?;
    write_snapshot(out, "sweep", &inputs, &config)?;
    let options = SweepOptions {
        jobs: config.sweep.jobs,
        cache_dir: Some(out.join(SWEEP_CACHE_DIR)),
        bins: config.evaluate.bins,
    };
    let result = sweep(
        &net_config,
        &config.sweep.dims,
        vocab.len(),
        &train,
        &test,
        config.seed,
        &options,
    )?;
    write_text(out, SWEEP_CSV, &result.to_csv())?;
    let report = detect(&result.dims(), &result.spi_values(), &config.detector())?;
    let summary = write_detection(out, &report)?;
    Ok(format!("{}{summary}", result.to_csv()))
}

pub fn critical_dim(args: &CriticalDimArgs) -> Result<String> {
    let mut config = RunConfig::load_or_default(args.common.config.as_deref())?;
    args.common.apply(&mut config);
    args.detector.apply(&mut config);
    let (dims, spi) = parse_spi_csv(&read_to_string(&args.input)?)?;
    config.sweep.dims = dims.clone();
    let report = detect(&dims, &spi, &config.detector())?;
    let out = &args.common.out;
    let mut inputs = BTreeMap::new();
    inputs.insert("input".to_string(), path_string(&args.input));
    write_snapshot(out, "critical-dim", &inputs, &config)?;
    write_detection(out, &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hold_out_is_seeded_and_order_preserving() {
        let lines: Vec<String> = (0..20).map(|i| format!("s{i}")).collect();
        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        let (train, test) = hold_out(&refs, 0.25, 7);
        assert_eq!(test.len(), 5);
        assert_eq!(train.len(), 15);
        let pos = |s: &str| refs.iter().position(|r| *r == s).unwrap();
        assert!(test.windows(2).all(|w| pos(w[0]) < pos(w[1])));
        assert_eq!(hold_out(&refs, 0.25, 7), (train, test));
        assert_ne!(hold_out(&refs, 0.25, 8).1, hold_out(&refs, 0.25, 7).1);
        assert!(hold_out(&refs, 0.0, 1).1.is_empty());
    }
}
