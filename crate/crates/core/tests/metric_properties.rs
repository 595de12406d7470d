//! SPI, SAI and cosine against straightforward reference implementations,
//! plus their algebraic properties.

use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;
use textae::metrics::{cosine, row_cosines, sai, similarity_matrix, spi};
use textae::util::rng_from_seed;

fn oracle_cos(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

fn rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.outer_iter().map(|r| r.to_vec()).collect()
}

fn oracle_spi(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let p = x.len();
    let mut total = 0.0;
    for i in 0..p {
        for j in 0..p {
            let (d, dh) = if i == j {
                (1.0, 1.0)
            } else {
                (oracle_cos(&x[i], &x[j]), oracle_cos(&y[i], &y[j]))
            };
            total += (d - dh) * (d - dh);
        }
    }
    total / (p * p) as f64
}

fn oracle_sai(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let kept: Vec<f64> = x
        .iter()
        .zip(y)
        .filter(|(u, _)| u.iter().any(|&a| a != 0.0))
        .map(|(u, v)| oracle_cos(u, v))
        .collect();
    kept.iter().sum::<f64>() / kept.len() as f64
}

fn random_nonneg(p: usize, n: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((p, n), |_| {
        if rng.random::<f64>() < 0.3 {
            0.0
        } else {
            rng.random::<f64>()
        }
    })
}

#[test]
fn spi_and_sai_match_double_loop_oracle() {
    let mut rng = rng_from_seed(2024);
    for _ in 0..50 {
        let x = random_nonneg(10, 20, &mut rng);
        let y = random_nonneg(10, 20, &mut rng);
        let s = spi(x.view(), y.view()).unwrap();
        assert!((s - oracle_spi(&rows(&x), &rows(&y))).abs() < 1e-12);
        let a = sai(x.view(), y.view()).unwrap();
        assert!((a - oracle_sai(&rows(&x), &rows(&y))).abs() < 1e-12);
    }
}

#[test]
fn similarity_matrix_matches_oracle() {
    let mut rng = rng_from_seed(5);
    let x = random_nonneg(3, 7, &mut rng);
    let d = similarity_matrix(x.view());
    let r = rows(&x);
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j {
                1.0
            } else {
                oracle_cos(&r[i], &r[j])
            };
            assert!((d[[i, j]] - expected).abs() < 1e-12);
        }
    }
}

fn nonneg_pair() -> impl Strategy<Value = (Array2<f64>, Array2<f64>)> {
    (1usize..8, 1usize..10).prop_flat_map(|(p, n)| {
        let cell = prop_oneof![Just(0.0), 0.0..5.0f64];
        (
            proptest::collection::vec(cell.clone(), p * n),
            proptest::collection::vec(cell, p * n),
        )
            .prop_map(move |(a, b)| {
                (
                    Array2::from_shape_vec((p, n), a).unwrap(),
                    Array2::from_shape_vec((p, n), b).unwrap(),
                )
            })
    })
}

fn has_nonzero_row(x: &Array2<f64>) -> bool {
    x.outer_iter().any(|r| r.iter().any(|&v| v != 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metrics_stay_in_unit_interval((x, y) in nonneg_pair()) {
        let s = spi(x.view(), y.view()).unwrap();
        prop_assert!((0.0..=1.0).contains(&s), "spi {}", s);
        if has_nonzero_row(&x) {
            let a = sai(x.view(), y.view()).unwrap();
            prop_assert!((0.0..=1.0).contains(&a), "sai {}", a);
        }
    }

    #[test]
    fn identical_inputs_are_fixed_points((x, _) in nonneg_pair()) {
        prop_assert_eq!(spi(x.view(), x.view()).unwrap(), 0.0);
        if has_nonzero_row(&x) {
            prop_assert_eq!(sai(x.view(), x.view()).unwrap(), 1.0);
        }
    }

    #[test]
    fn spi_is_symmetric((x, y) in nonneg_pair()) {
        prop_assert_eq!(spi(x.view(), y.view()).unwrap(), spi(y.view(), x.view()).unwrap());
    }

    #[test]
    fn joint_permutation_leaves_metrics_unchanged((x, y) in nonneg_pair(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        order.shuffle(&mut rng_from_seed(seed));
        let px = x.select(ndarray::Axis(0), &order);
        let py = y.select(ndarray::Axis(0), &order);
        prop_assert!((spi(x.view(), y.view()).unwrap() - spi(px.view(), py.view()).unwrap()).abs() < 1e-12);
        if has_nonzero_row(&x) {
            prop_assert!((sai(x.view(), y.view()).unwrap() - sai(px.view(), py.view()).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_is_scale_invariant(
        u in proptest::collection::vec(0.0..5.0f64, 1..12),
        c in 0.01..100.0f64,
    ) {
        let v: Vec<f64> = u.iter().rev().copied().collect();
        let scaled: Vec<f64> = u.iter().map(|a| a * c).collect();
        prop_assert!((cosine(&u, &v).unwrap() - cosine(&scaled, &v).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sai_skips_exactly_the_zero_rows((x, y) in nonneg_pair()) {
        let zero_rows = x.outer_iter().filter(|r| r.iter().all(|&v| v == 0.0)).count();
        let rc = row_cosines(x.view(), y.view()).unwrap();
        prop_assert_eq!(rc.skipped_empty, zero_rows);
        prop_assert_eq!(rc.cosines.len() + zero_rows, x.nrows());
    }
}
