//! The steepness-peak detector on synthetic curves, and sweep bookkeeping.

use textae::autoencoder::{ModelKind, NetConfig};
use textae::bottleneck::{
    critical_dimension, detect, steepness_series, sweep, DetectorConfig, PercentDiff, SweepOptions,
};
use textae::corpus::SentenceVector;
use textae::Error;

fn dims() -> Vec<usize> {
    (1..=10).map(|k| k * 10).collect()
}

/// Slope −0.02 up to m=40, −0.001 after.
fn knee_at_40() -> Vec<f64> {
    dims()
        .iter()
        .map(|&m| {
            let m = m as f64;
            if m <= 40.0 {
                0.9 - 0.02 * (m - 10.0)
            } else {
                0.3 - 0.001 * (m - 40.0)
            }
        })
        .collect()
}

#[test]
fn knee_fixture_peaks_at_40() {
    let s = steepness_series(&dims(), &knee_at_40(), PercentDiff::default()).unwrap();
    assert_eq!(s.len(), 8);
    let at40 = s.iter().find(|p| p.0 == 40).unwrap().1;
    assert!((at40 - 95.0).abs() < 1e-6, "{at40}");
    for (m, c) in &s {
        if *m != 40 {
            assert!(*c < 1e-6, "m={m} c={c}");
        }
    }
    assert_eq!(critical_dimension(&s, 0.8).unwrap(), 40);
    assert_eq!(
        detect(&dims(), &knee_at_40(), &DetectorConfig::default())
            .unwrap()
            .critical_dim,
        Some(40)
    );
}

#[test]
fn linear_curve_has_no_peak() {
    let linear: Vec<f64> = dims().iter().map(|&m| 1.0 - 0.0078125 * m as f64).collect();
    let s = steepness_series(&dims(), &linear, PercentDiff::default()).unwrap();
    assert!(s.iter().all(|p| p.1 == 0.0));
    assert!(matches!(critical_dimension(&s, 0.8), Err(Error::NoPeak)));
}

#[test]
fn constant_shift_leaves_steepness_unchanged() {
    let shifted: Vec<f64> = knee_at_40().iter().map(|v| v + 0.125).collect();
    let a = steepness_series(&dims(), &knee_at_40(), PercentDiff::default()).unwrap();
    let b = steepness_series(&dims(), &shifted, PercentDiff::default()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.0, y.0);
        assert!((x.1 - y.1).abs() < 1e-6);
    }
}

#[test]
fn unique_maximum_wins_at_tau_one_and_ties_go_right() {
    let s = [(20, 3.0), (30, 10.0), (40, 9.99), (50, 1.0)];
    assert_eq!(critical_dimension(&s, 1.0).unwrap(), 30);
    let tied = [(20, 3.0), (30, 10.0), (40, 2.0), (50, 10.0), (60, 1.0)];
    assert_eq!(critical_dimension(&tied, 1.0).unwrap(), 50);
}

#[test]
fn quasi_linear_curves_stay_below_the_floor() {
    // Gently decreasing RC and increasing SAI with a little wobble.
    let wobble = [
        0.0, 0.004, -0.003, 0.002, 0.0, -0.004, 0.003, 0.0, -0.002, 0.001,
    ];
    let rc: Vec<f64> = dims()
        .iter()
        .zip(wobble)
        .map(|(&m, w)| 30.0 - 0.1 * m as f64 + w)
        .collect();
    let sai: Vec<f64> = dims()
        .iter()
        .zip(wobble)
        .map(|(&m, w)| 0.3 + 0.004 * m as f64 + w / 100.0)
        .collect();
    let config = DetectorConfig {
        min_steepness: 10.0,
        ..DetectorConfig::default()
    };
    assert_eq!(detect(&dims(), &rc, &config).unwrap().critical_dim, None);
    assert_eq!(detect(&dims(), &sai, &config).unwrap().critical_dim, None);
    assert_eq!(
        detect(&dims(), &knee_at_40(), &config)
            .unwrap()
            .critical_dim,
        Some(40)
    );
}

#[test]
fn symmetric_variant_also_finds_the_knee() {
    let config = DetectorConfig {
        percent_diff: PercentDiff::SymmetricMean,
        ..DetectorConfig::default()
    };
    assert_eq!(
        detect(&dims(), &knee_at_40(), &config)
            .unwrap()
            .critical_dim,
        Some(40)
    );
}

fn small_corpus() -> Vec<SentenceVector> {
    let patterns: [&[(u32, u32)]; 4] = [
        &[(0, 1), (1, 1)],
        &[(2, 1), (3, 1)],
        &[(4, 2), (5, 1)],
        &[(6, 1), (7, 1)],
    ];
    (0..40)
        .map(|i| SentenceVector::from_pairs(patterns[i % 4].to_vec()).unwrap())
        .collect()
}

fn small_config() -> NetConfig {
    let mut c = NetConfig::new(ModelKind::Bda, vec![6, 2]);
    c.epochs_pretrain = 3;
    c.epochs_finetune = 3;
    c.pretrain.batch_size = 10;
    c.finetune.batch_size = 10;
    c
}

#[test]
fn sweep_is_deterministic_and_order_independent() {
    let data = small_corpus();
    let run = |jobs| {
        let options = SweepOptions {
            jobs,
            ..SweepOptions::default()
        };
        sweep(
            &small_config(),
            &[2, 3, 4],
            8,
            &data,
            &data[..12],
            9,
            &options,
        )
        .unwrap()
    };
    let a = run(1);
    assert_eq!(a.dims(), vec![2, 3, 4]);
    assert_eq!(a.points().len(), 3);
    assert_eq!(a, run(3));
    assert_eq!(a.to_csv(), run(2).to_csv());
}

#[test]
fn sweep_resumes_from_cache() {
    let data = small_corpus();
    let dir = tempfile::tempdir().unwrap();
    let options = SweepOptions {
        cache_dir: Some(dir.path().to_path_buf()),
        ..SweepOptions::default()
    };
    let full = sweep(&small_config(), &[2, 3, 4], 8, &data, &data, 1, &options).unwrap();
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(entries, 3);

    std::fs::remove_file(dir.path().join("dim_00003.json")).unwrap();
    let resumed = sweep(&small_config(), &[2, 3, 4], 8, &data, &data, 1, &options).unwrap();
    assert_eq!(resumed.to_csv(), full.to_csv());

    // A changed configuration must not reuse stale entries.
    let mut other = small_config();
    other.epochs_finetune = 1;
    let changed = sweep(&other, &[2, 3, 4], 8, &data, &data, 1, &options).unwrap();
    let fresh = sweep(
        &other,
        &[2, 3, 4],
        8,
        &data,
        &data,
        1,
        &SweepOptions::default(),
    )
    .unwrap();
    assert_eq!(changed, fresh);
}

#[test]
fn sweep_rejects_short_or_unsorted_dims() {
    let data = small_corpus();
    let o = SweepOptions::default();
    assert!(matches!(
        sweep(&small_config(), &[2, 3], 8, &data, &data, 1, &o),
        Err(Error::TooFewPoints(2))
    ));
    assert!(sweep(&small_config(), &[2, 4, 3], 8, &data, &data, 1, &o).is_err());
}
