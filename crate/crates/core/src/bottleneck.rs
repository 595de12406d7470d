//! Bottleneck sweeps and critical-dimension detection.
//!
//! A sweep trains one autoencoder per code width `m` and records RC, SPI and
//! SAI on held-out sentences. The detector walks the resulting SPI curve:
//! with `s_i` the slope between consecutive points, every interior point gets
//! a steepness `c_i = 100·|s_{i-1} − s_i| / (|s_{i-1}| + ε)`, and the critical
//! dimension is the right-most local maximum of `c` that reaches
//! `tau · max(c)`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autoencoder::{train_autoencoder, NetConfig};
use crate::corpus::{format_vectors, SentenceVector};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, DEFAULT_BINS};
use crate::util::{derive_seed, hash64, read_to_string, write_atomic};

pub const DEFAULT_TAU: f64 = 0.8;
/// Guards the steepness ratio against a zero previous slope.
pub const SLOPE_EPS: f64 = 1e-12;
/// Steepness below this many percent is treated as numerically flat.
pub const DEFAULT_MIN_STEEPNESS: f64 = 1e-6;

pub fn default_dims() -> Vec<usize> {
    (1..=10).map(|k| k * 10).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub m: usize,
    pub rc: f64,
    pub spi: f64,
    pub sai: f64,
}

/// Metric curves over ascending bottleneck widths.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn new(points: Vec<SweepPoint>) -> Result<Self> {
        let dims: Vec<usize> = points.iter().map(|p| p.m).collect();
        check_dims(&dims)?;
        Ok(Self { points })
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    pub fn dims(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.m).collect()
    }

    pub fn spi_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.spi).collect()
    }

    pub fn rc_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rc).collect()
    }

    pub fn sai_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.sai).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,rc,spi,sai\n");
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.m, p.rc, p.spi, p.sai).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = parse_csv(text, &["m", "rc", "spi", "sai"])?;
        let points = rows
            .into_iter()
            .map(|(m, v)| SweepPoint {
                m,
                rc: v[0],
                spi: v[1],
                sai: v[2],
            })
            .collect();
        Self::new(points)
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 3 {
        return Err(Error::TooFewPoints(dims.len()));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "dimensions must be strictly increasing, got {dims:?}"
        )));
    }
    Ok(())
}

/// Parses a headed CSV whose first column is an integer dimension. Columns
/// are matched by header name, so extra columns are ignored; the first
/// entry of `columns` names the dimension column.
fn parse_csv(text: &str, columns: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let bad = |msg: String| Error::format("curve CSV", msg);
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let pos = columns
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| bad(format!("missing column {c:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (ln, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(bad(format!(
                "row {} has {} fields, header has {}",
                ln + 1,
                fields.len(),
                header.len()
            )));
        }
        let m: usize = fields[pos[0]]
            .parse()
            .map_err(|_| bad(format!("bad dimension {:?}", fields[pos[0]])))?;
        let values = pos[1..]
            .iter()
            .map(|&i| {
                fields[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("bad value {:?}", fields[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((m, values));
    }
    Ok(out)
}

/// Reads an `m,spi` curve (extra columns allowed), e.g. a sweep CSV or an
/// externally produced SPI curve.
pub fn parse_spi_csv(text: &str) -> Result<(Vec<usize>, Vec<f64>)> {
    let rows = parse_csv(text, &["m", "spi"])?;
    let dims: Vec<usize> = rows.iter().map(|r| r.0).collect();
    check_dims(&dims)?;
    Ok((dims, rows.into_iter().map(|r| r.1[0]).collect()))
}

/// Two-point slope `(v2 − v1) / (m2 − m1)`.
pub fn slope(a1: (usize, f64), a2: (usize, f64)) -> Result<f64> {
    if a1.0 == a2.0 {
        return Err(Error::DegenerateInterval(a1.0));
    }
    Ok((a2.1 - a1.1) / (a2.0 as f64 - a1.0 as f64))
}

/// How the change between two consecutive slopes is expressed as a
/// percentage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PercentDiff {
    /// `100·|s_prev − s_next| / (|s_prev| + ε)`.
    #[default]
    RelativeToPrevious,
    /// `100·|s_prev − s_next| / ((|s_prev| + |s_next|)/2 + ε)`.
    SymmetricMean,
}

impl PercentDiff {
    pub fn apply(self, prev: f64, next: f64) -> f64 {
        let denom = match self {
            PercentDiff::RelativeToPrevious => prev.abs(),
            PercentDiff::SymmetricMean => (prev.abs() + next.abs()) / 2.0,
        };
        100.0 * (prev - next).abs() / (denom + SLOPE_EPS)
    }
}

/// Steepness at every interior point of the curve, as `(m, c)` pairs.
pub fn steepness_series(
    dims: &[usize],
    values: &[f64],
    mode: PercentDiff,
) -> Result<Vec<(usize, f64)>> {
    if dims.len() != values.len() {
        return Err(Error::DimensionMismatch {
            what: "curve values",
            expected: dims.len(),
            got: values.len(),
        });
    }
    check_dims(dims)?;
    let slopes = dims
        .windows(2)
        .zip(values.windows(2))
        .map(|(d, v)| slope((d[0], v[0]), (d[1], v[1])))
        .collect::<Result<Vec<_>>>()?;
    Ok(slopes
        .windows(2)
        .enumerate()
        .map(|(i, s)| (dims[i + 1], mode.apply(s[0], s[1])))
        .collect())
}

/// Right-most local maximum of the steepness series with `c ≥ tau·max(c)`
/// and `c ≥ min_steepness`. Endpoints count as local maxima when they are
/// not below their single neighbour.
pub fn critical_dimension_with_floor(
    steepness: &[(usize, f64)],
    tau: f64,
    min_steepness: f64,
) -> Result<usize> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "tau must lie in (0, 1], got {tau}"
        )));
    }
    if !(min_steepness.is_finite() && min_steepness >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "min_steepness must be finite and non-negative, got {min_steepness}"
        )));
    }
    if steepness.is_empty() {
        return Err(Error::TooFewPoints(2));
    }
    let c: Vec<f64> = steepness.iter().map(|s| s.1).collect();
    let max = c.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 || max < min_steepness {
        return Err(Error::NoPeak);
    }
    let cut = (tau * max).max(min_steepness);
    (0..c.len())
        .rev()
        .find(|&i| {
            let left_ok = i == 0 || c[i] >= c[i - 1];
            let right_ok = i + 1 == c.len() || c[i] >= c[i + 1];
            left_ok && right_ok && c[i] >= cut
        })
        .map(|i| steepness[i].0)
        .ok_or(Error::NoPeak)
}

pub fn critical_dimension(steepness: &[(usize, f64)], tau: f64) -> Result<usize> {
    critical_dimension_with_floor(steepness, tau, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub tau: f64,
    pub percent_diff: PercentDiff,
    pub min_steepness: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            percent_diff: PercentDiff::default(),
            min_steepness: DEFAULT_MIN_STEEPNESS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalDimReport {
    pub steepness: Vec<(usize, f64)>,
    /// `None` when the curve has no qualifying peak.
    pub critical_dim: Option<usize>,
    pub peak_threshold_used: f64,
}

impl CriticalDimReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,steepness\n");
        for (m, c) in &self.steepness {
            writeln!(out, "{m},{c}").unwrap();
        }
        out
    }

    pub fn summary_line(&self) -> String {
        match self.critical_dim {
            Some(m) => format!("critical_dim={m}"),
            None => "critical_dim=none".to_string(),
        }
    }
}

/// Steepness series plus critical dimension for one curve.
pub fn detect(
    dims: &[usize],
    values: &[f64],
    config: &DetectorConfig,
) -> Result<CriticalDimReport> {
    let steepness = steepness_series(dims, values, config.percent_diff)?;
    let critical_dim =
        match critical_dimension_with_floor(&steepness, config.tau, config.min_steepness) {
            Ok(m) => Some(m),
            Err(Error::NoPeak) => None,
            Err(e) => return Err(e),
        };
    Ok(CriticalDimReport {
        steepness,
        critical_dim,
        peak_threshold_used: config.tau,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Worker threads for per-dimension trainings; 0 uses rayon's default.
    pub jobs: usize,
    /// When set, each finished dimension is stored here and reused by later
    /// runs with the same configuration and data.
    pub cache_dir: Option<PathBuf>,
    pub bins: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            jobs: 0,
            cache_dir: None,
            bins: DEFAULT_BINS,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CachedPoint {
    fingerprint: String,
    point: SweepPoint,
}

fn cache_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("dim_{m:05}.json"))
}

/// Trains a fresh autoencoder for every width in `dims` (seed derived from
/// `master_seed` and `m`) and evaluates it on `test`.
pub fn sweep(
    base: &NetConfig,
    dims: &[usize],
    input_dim: usize,
    train: &[SentenceVector],
    test: &[SentenceVector],
    master_seed: u64,
    options: &SweepOptions,
) -> Result<SweepResult> {
    check_dims(dims)?;
    base.validate()?;
    let data_hash = hash64(
        format!(
            "{input_dim}\n{}\n{}",
            format_vectors(train),
            format_vectors(test)
        )
        .as_bytes(),
    );

    let run_one = |m: usize| -> Result<SweepPoint> {
        let mut config = base.with_bottleneck(m);
        config.seed = derive_seed(master_seed, m as u64);
        let fingerprint = format!(
            "{:016x}",
            hash64(
                format!(
                    "{}\n{data_hash:016x}\n{}",
                    serde_json::to_string(&config).expect("config serializes"),
                    options.bins
                )
                .as_bytes()
            )
        );
        if let Some(dir) = &options.cache_dir {
            let path = cache_path(dir, m);
            if path.exists() {
                let cached: CachedPoint = serde_json::from_str(&read_to_string(&path)?)
                    .map_err(|e| Error::format("sweep cache entry", e.to_string()))?;
                if cached.fingerprint == fingerprint && cached.point.m == m {
                    return Ok(cached.point);
                }
            }
        }
        let outcome = train_autoencoder(&config, input_dim, train, false)?;
        let report = evaluate(outcome.final_net(), test, options.bins)?;
        let point = SweepPoint {
            m,
            rc: report.rc,
            spi: report.spi,
            sai: report.sai,
        };
        if let Some(dir) = &options.cache_dir {
            let entry = CachedPoint { fingerprint, point };
            let json = serde_json::to_string_pretty(&entry).expect("cache entry serializes");
            write_atomic(&cache_path(dir, m), json.as_bytes())?;
        }
        Ok(point)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let points: Vec<Result<SweepPoint>> = pool.install(|| {
        use rayon::prelude::*;
        dims.par_iter().map(|&m| run_one(m)).collect()
    });
    SweepResult::new(points.into_iter().collect::<Result<Vec<_>>>()?)
}
