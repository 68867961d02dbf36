//! No-data check: a chain run on empty groups must sample the prior.

#![allow(dead_code)]

use gdp_core::dag::{Dag, LayeredDag};
use gdp_core::gibbs::{run_chains, GdpModel};
use gdp_core::model::{sample_alphas, GdpConfig, GroupedDataset, McmcSchedule};
use gdp_core::prior::sample_finite_gdp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct MomentCheck {
    pub name: &'static str,
    pub chain_mean: f64,
    pub chain_se: f64,
    pub prior_mean: f64,
    pub prior_se: f64,
}

impl MomentCheck {
    pub fn z(&self) -> f64 {
        (self.chain_mean - self.prior_mean).abs() / self.chain_se.hypot(self.prior_se)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn iid_se(v: &[f64]) -> f64 {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (var / v.len() as f64).sqrt()
}

/// Statistics of the root: `α`, `α²`, `β₁`, `β₁²` and `Σ β_l²`.
fn root_stats(alpha: f64, beta: &[f64]) -> [f64; 5] {
    [alpha, alpha * alpha, beta[0], beta[0] * beta[0], beta.iter().map(|b| b * b).sum()]
}

const NAMES: [&str; 5] = ["alpha", "alpha^2", "beta_1", "beta_1^2", "sum beta^2"];

/// Runs `chains` independent chains on the experimental DAG with all
/// groups empty and compares root moments after burn-in with independent
/// forward draws from the truncated prior. The chain-side standard error is
/// the spread of per-chain means, which stays valid however slowly a single
/// chain mixes.
pub fn prior_recovery(
    seed: u64,
    truncation: usize,
    alpha0: f64,
    chains: usize,
    iterations: usize,
    burn_in: usize,
    prior_draws: usize,
) -> Vec<MomentCheck> {
    let ldag = LayeredDag::new(Dag::experimental()).unwrap();
    let mut config = GdpConfig::new(2);
    config.truncation = truncation;
    config.alpha0 = alpha0;
    config.mcmc = McmcSchedule {
        iterations,
        burn_in,
        thin: 1,
        seed,
        chains,
    };
    let model = GdpModel::from_config(ldag.clone(), &config).unwrap();
    let data = GroupedDataset::empty(2, 8);
    let samples = run_chains(&model, &data, &config).unwrap();
    let chain_means: Vec<[f64; 5]> = samples
        .iter()
        .map(|c| {
            let mut m = [0.0; 5];
            for r in &c.records {
                for (a, v) in m.iter_mut().zip(root_stats(r.alphas[0], &r.beta[0])) {
                    *a += v / c.records.len() as f64;
                }
            }
            m
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let prior_stats: Vec<[f64; 5]> = (0..prior_draws)
        .map(|_| {
            let alphas = sample_alphas(&ldag, alpha0, &mut rng);
            let w = sample_finite_gdp(&ldag, &alphas, truncation, &mut rng).unwrap();
            root_stats(alphas[0], &w.beta[0])
        })
        .collect();

    (0..5)
        .map(|k| {
            let c: Vec<f64> = chain_means.iter().map(|s| s[k]).collect();
            let p: Vec<f64> = prior_stats.iter().map(|s| s[k]).collect();
            MomentCheck {
                name: NAMES[k],
                chain_mean: mean(&c),
                chain_se: iid_se(&c),
                prior_mean: mean(&p),
                prior_se: iid_se(&p),
            }
        })
        .collect()
}
