//! Monte Carlo equivalence checks between the prior constructions.

#![allow(dead_code)]

use gdp_core::dag::{Dag, LayeredDag};
use gdp_core::dist::categorical;
use gdp_core::prior::{
    lemma_mixture_oracle, restaurant_sim, sample_explicit_mixture_gdp, sample_finite_gdp, stick_break,
    MomentReport, SampleMoments,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-node worst z-score between the hypernode-chain sampler and the
/// explicit parent-mixture sampler, over first and second moments of `β_j`
/// for the layer-2 and layer-3 nodes of the experimental DAG.
pub fn theorem1(seed: u64, draws: usize, truncation: usize, alpha: f64) -> Vec<(usize, f64)> {
    let ldag = LayeredDag::new(Dag::experimental()).unwrap();
    let alphas = vec![alpha; ldag.node_count()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = [4, 5, 6, 7];
    let mut chain = vec![Vec::with_capacity(draws); nodes.len()];
    let mut explicit = vec![Vec::with_capacity(draws); nodes.len()];
    for _ in 0..draws {
        let a = sample_finite_gdp(&ldag, &alphas, truncation, &mut rng).unwrap();
        let b = sample_explicit_mixture_gdp(&ldag, &alphas, truncation, &mut rng).unwrap();
        for (k, &j) in nodes.iter().enumerate() {
            chain[k].push(a.beta[j].clone());
            explicit[k].push(b.beta[j].clone());
        }
    }
    nodes
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let z = SampleMoments::from_draws(&chain[k]).max_z_against(&SampleMoments::from_draws(&explicit[k]));
            (j, z)
        })
        .collect()
}

/// The three mixture sets used for the Dirichlet-mixture identity.
pub fn lemma_sets() -> Vec<Vec<Vec<f64>>> {
    vec![
        vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        vec![vec![0.5, 1.0, 2.0], vec![2.0, 0.3, 1.0], vec![1.0, 1.0, 1.0]],
        vec![vec![0.2, 0.2, 0.2, 0.2], vec![4.0, 1.0, 0.5, 2.5]],
    ]
}

pub fn lemma_reports(seed: u64, draws: usize) -> Vec<MomentReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lemma_sets()
        .iter()
        .map(|set| lemma_mixture_oracle(set, draws, &mut rng).unwrap())
        .collect()
}

/// Index of the set partition of three labelled items:
/// `{123}`, `{12|3}`, `{13|2}`, `{1|23}`, `{1|2|3}`.
pub fn partition_of_three(z: &[usize]) -> usize {
    match (z[0] == z[1], z[0] == z[2], z[1] == z[2]) {
        (true, true, _) => 0,
        (true, false, _) => 1,
        (false, true, _) => 2,
        (false, false, true) => 3,
        _ => 4,
    }
}

/// Total-variation distance between the partition-of-three laws induced by
/// the single-node restaurant and by stick-breaking weights.
pub fn restaurant_vs_stick_break(seed: u64, runs: usize, alpha: f64, truncation: usize) -> f64 {
    let ldag = LayeredDag::new(Dag::new(1, &[]).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = [0usize; 5];
    let mut b = [0usize; 5];
    for _ in 0..runs {
        let (_, labels) = restaurant_sim(&ldag, &[alpha], &[3], &mut rng).unwrap();
        a[partition_of_three(&labels[0])] += 1;
        let w = stick_break(alpha, truncation, &mut rng);
        let z: Vec<usize> = (0..3).map(|_| categorical(&w, &mut rng)).collect();
        b[partition_of_three(&z)] += 1;
    }
    0.5 * a
        .iter()
        .zip(&b)
        .map(|(&x, &y)| (x as f64 - y as f64).abs() / runs as f64)
        .sum::<f64>()
}
