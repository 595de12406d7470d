//! Conditionals of both RBM flavors against brute-force enumeration of the
//! joint Boltzmann distribution `p(v, h) ∝ exp(-E(v, h))`.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use textae::rbm::{Flavor, RbmParams};
use textae::util::rng_from_seed;

const TOL: f64 = 1e-10;

fn random_params(n_vis: usize, n_hid: usize, flavor: Flavor, seed: u64) -> RbmParams {
    let mut rng = rng_from_seed(seed);
    let mut u = |_| rng.random::<f64>() * 4.0 - 2.0;
    let weights = Array2::from_shape_fn((n_vis, n_hid), |ij| u(ij.0));
    let vis_bias = Array1::from_shape_fn(n_vis, &mut u);
    let hid_bias = Array1::from_shape_fn(n_hid, &mut u);
    RbmParams::from_parts(weights, vis_bias, hid_bias, flavor).unwrap()
}

fn binary_states(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|bits| (0..n).map(|i| ((bits >> i) & 1) as f64).collect())
        .collect()
}

/// `p(x_j = 1 | fixed)` for each unit of the free layer, by summing
/// `exp(-E)` over every configuration of that layer.
fn brute_marginals(free: &[Vec<f64>], energy: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let weights: Vec<f64> = free.iter().map(|s| (-energy(s)).exp()).collect();
    let z: f64 = weights.iter().sum();
    (0..free[0].len())
        .map(|j| {
            free.iter()
                .zip(&weights)
                .filter(|(s, _)| s[j] == 1.0)
                .map(|(_, w)| w)
                .sum::<f64>()
                / z
        })
        .collect()
}

fn assert_close(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < TOL, "{a:?} vs {b:?}");
    }
}

#[test]
fn binary_conditionals_match_enumeration() {
    for seed in 0..5 {
        let rbm = random_params(2, 2, Flavor::BinaryBinary, seed);
        let states = binary_states(2);
        for v in &states {
            let brute = brute_marginals(&states, |h| rbm.energy_binary(v, h).unwrap());
            let closed = rbm.hidden_probs(ArrayView1::from(v)).unwrap();
            assert_close(closed.as_slice().unwrap(), &brute);
        }
        for h in &states {
            let brute = brute_marginals(&states, |v| rbm.energy_binary(v, h).unwrap());
            let closed = rbm.visible_probs_binary(ArrayView1::from(h)).unwrap();
            assert_close(closed.as_slice().unwrap(), &brute);
        }
    }
}

fn counts_of(words: &[usize], k: usize) -> Vec<f64> {
    let mut c = vec![0.0; k];
    for &w in words {
        c[w] += 1.0;
    }
    c
}

#[test]
fn replicated_softmax_conditionals_match_enumeration() {
    const K: usize = 3;
    const D: usize = 2;
    let hidden = binary_states(2);
    // Ordered word sequences of length D; each is one visible configuration.
    let sequences: Vec<Vec<usize>> = (0..K * K).map(|i| vec![i / K, i % K]).collect();
    for seed in 10..15 {
        let rbm = random_params(K, 2, Flavor::ReplicatedSoftmax, seed);

        for words in &sequences {
            let v = counts_of(words, K);
            let brute = brute_marginals(&hidden, |h| rbm.energy_rsm(&v, D as f64, h).unwrap());
            let closed = rbm.hidden_probs(ArrayView1::from(&v)).unwrap();
            assert_close(closed.as_slice().unwrap(), &brute);
        }

        for h in &hidden {
            let weights: Vec<f64> = sequences
                .iter()
                .map(|w| (-rbm.energy_rsm(&counts_of(w, K), D as f64, h).unwrap()).exp())
                .collect();
            let z: f64 = weights.iter().sum();
            let closed = rbm.visible_softmax_rsm(ArrayView1::from(h)).unwrap();
            // Every word slot has the same marginal: the softmax.
            for slot in 0..D {
                let brute: Vec<f64> = (0..K)
                    .map(|k| {
                        sequences
                            .iter()
                            .zip(&weights)
                            .filter(|(w, _)| w[slot] == k)
                            .map(|(_, p)| p)
                            .sum::<f64>()
                            / z
                    })
                    .collect();
                assert_close(closed.as_slice().unwrap(), &brute);
            }
        }
    }
}

#[test]
fn rsm_energy_rejects_wrong_length() {
    let rbm = random_params(3, 2, Flavor::ReplicatedSoftmax, 1);
    assert!(rbm.energy_rsm(&[1.0, 1.0, 0.0], 3.0, &[0.0, 1.0]).is_err());
    assert!(rbm.energy_binary(&[1.0, 1.0, 0.0], &[0.0, 1.0]).is_err());
}
