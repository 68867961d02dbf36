mod common;

use common::geweke::prior_recovery;
use gdp_core::dag::{Dag, LayeredDag};
use gdp_core::dist::{ln_gamma_draw, standard_normal};
use gdp_core::gibbs::{ChainState, GdpModel};
use gdp_core::model::{AlphaVector, GaussianComponent, GroupedDataset, NiwParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Two observed groups under a hidden root.
fn fork_model(l: usize) -> GdpModel {
    let ldag = LayeredDag::from_dag(&Dag::new(2, &[]).unwrap()).unwrap();
    GdpModel::new(ldag, l, 2.0, NiwParams::weakly_informative(2)).unwrap()
}

fn state_with_counts(model: &GdpModel, group_counts: &[Vec<usize>], seed: u64) -> (ChainState, GroupedDataset) {
    let rows = group_counts
        .iter()
        .map(|c| vec![vec![0.0, 0.0]; c.iter().sum::<usize>()])
        .collect();
    let data = GroupedDataset::from_rows(2, rows).unwrap();
    let mut state = model.init_state(&data, &mut rng(seed)).unwrap();
    for (j, c) in group_counts.iter().enumerate() {
        state.labels[j] = c.iter().enumerate().flat_map(|(l, &k)| std::iter::repeat_n(l, k)).collect();
    }
    state.counts = state.recount();
    (state, data)
}

/// Mean and second moment of the density `∝ x^(a−1) (1−x)^(b−1)` on a
/// midpoint grid in `x`.
fn grid_moments(a: f64, b: f64) -> (f64, f64) {
    let n = 2_000_000;
    let h = 1.0 / n as f64;
    let logs: Vec<f64> = (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln()
        })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, lg) in logs.iter().enumerate() {
        let x = (i as f64 + 0.5) * h;
        let w = (lg - top).exp();
        z += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    (m1 / z, m2 / z)
}

#[test]
fn two_component_beta_matches_grid_integration() {
    let model = fork_model(2);
    let (mut state, _) = state_with_counts(&model, &[vec![4, 9], vec![0, 0]], 1);
    state.alphas.set(0, 1.7);
    state.weights.ln_beta[2] = vec![0.3f64.ln(), 0.7f64.ln()];
    let (a, b) = (4.0 + 1.7 * 0.3, 9.0 + 1.7 * 0.7);
    let (g1, g2) = grid_moments(a, b);
    let mut r = rng(2);
    let n = 100_000;
    let mut first = Vec::with_capacity(n);
    for _ in 0..n {
        model.update_nonroot_betas(&mut state, &mut r);
        first.push(state.weights.ln_beta[0][0].exp());
    }
    let (m, se) = mean_se(&first);
    assert!((m - g1).abs() < 3.0 * se, "{m} ± {se} vs {g1}");
    let sq: Vec<f64> = first.iter().map(|x| x * x).collect();
    let (m2, se2) = mean_se(&sq);
    assert!((m2 - g2).abs() < 3.0 * se2, "{m2} ± {se2} vs {g2}");
}

#[test]
fn empty_group_draws_from_prior_dirichlet() {
    let model = fork_model(3);
    let (mut state, _) = state_with_counts(&model, &[vec![0, 0, 0], vec![0, 0, 0]], 3);
    state.alphas.set(1, 2.5);
    state.weights.ln_beta[2] = vec![0.2f64.ln(), 0.3f64.ln(), 0.5f64.ln()];
    let mut r = rng(4);
    let draws: Vec<f64> = (0..50_000)
        .map(|_| {
            model.update_nonroot_betas(&mut state, &mut r);
            state.weights.ln_beta[1][2].exp()
        })
        .collect();
    let (m, se) = mean_se(&draws);
    assert!((m - 0.5).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn dominant_count_concentrates_weight() {
    let model = fork_model(10);
    let mut counts = vec![0; 10];
    counts[0] = 1000;
    let (mut state, _) = state_with_counts(&model, &[counts, vec![0; 10]], 5);
    state.alphas.set(0, 0.5);
    let mut r = rng(6);
    let trials = 2_000;
    let hits = (0..trials)
        .filter(|_| {
            model.update_nonroot_betas(&mut state, &mut r);
            state.weights.ln_beta[0][0].exp() > 0.95
        })
        .count();
    assert!(hits as f64 / trials as f64 > 0.99, "{hits}");
}

#[test]
fn giant_component_mean_is_recovered() {
    let model = fork_model(3);
    let truth = [1.5, -0.5];
    let mut r = rng(7);
    let rows: Vec<Vec<f64>> = (0..10_000)
        .map(|_| vec![truth[0] + standard_normal(&mut r), truth[1] + standard_normal(&mut r)])
        .collect();
    let data = GroupedDataset::from_rows(2, vec![rows, vec![]]).unwrap();
    let mut state = model.init_state(&data, &mut r).unwrap();
    state.labels[0] = vec![0; 10_000];
    state.counts = state.recount();
    for _ in 0..20 {
        model.update_atoms(&mut state, &data, &mut r).unwrap();
        let m = state.atoms[0].mean();
        assert!((m[0] - truth[0]).abs() < 0.05 && (m[1] - truth[1]).abs() < 0.05, "{m:?}");
    }
}

#[test]
fn identical_atoms_give_uniform_labels() {
    let l = 10;
    let model = fork_model(l);
    let n = 100_000;
    let data = GroupedDataset::from_rows(2, vec![vec![vec![0.3, 0.1]; n], vec![]]).unwrap();
    let mut r = rng(8);
    let mut state = model.init_state(&data, &mut r).unwrap();
    let atom = GaussianComponent::new(vec![0.0, 0.0], vec![1.0, 0.2, 0.2, 1.0]).unwrap();
    state.atoms = vec![atom; l];
    state.weights.ln_beta[0] = vec![-(l as f64).ln(); l];
    model.update_labels(&mut state, &data, &mut r).unwrap();
    assert_eq!(state.counts, state.recount());
    let expected = n as f64 / l as f64;
    let stat: f64 = state.counts[0].iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((l - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat}, p = {p}");
}

fn isolated_root() -> (GdpModel, GroupedDataset) {
    let ldag = LayeredDag::new(Dag::new(1, &[]).unwrap()).unwrap();
    let model = GdpModel::new(ldag, 4, 3.0, NiwParams::weakly_informative(2)).unwrap();
    (model, GroupedDataset::empty(2, 1))
}

#[test]
fn childless_root_beta_is_symmetric_dirichlet() {
    let (model, data) = isolated_root();
    let mut r = rng(9);
    let mut state = model.init_state(&data, &mut r).unwrap();
    state.alphas = AlphaVector::new(vec![6.0]).unwrap();
    let mut kernels = model.new_kernels(1.0, 0.3);
    for s in 1..=5_000 {
        model.update_root_beta(&mut state, &mut kernels, &mut r);
        if s % 10 == 0 {
            kernels[0].adapt_from_window().unwrap();
        }
    }
    kernels[0].freeze();
    let n = 100_000;
    let trace: Vec<f64> = (0..n)
        .map(|_| {
            model.update_root_beta(&mut state, &mut kernels, &mut r);
            state.weights.ln_beta[0][1].exp()
        })
        .collect();
    // Dir(1.5, 1.5, 1.5, 1.5): mean 1/4, second moment 1.5·2.5 / (6·7).
    let m = trace.iter().sum::<f64>() / n as f64;
    let se = gdp_core::diagnostics::batch_means_se(&trace);
    assert!((m - 0.25).abs() < 3.0 * se, "{m} ± {se}");
    let sq: Vec<f64> = trace.iter().map(|x| x * x).collect();
    let m2 = sq.iter().sum::<f64>() / n as f64;
    let se2 = gdp_core::diagnostics::batch_means_se(&sq);
    assert!((m2 - 3.75 / 42.0).abs() < 3.0 * se2, "{m2} ± {se2}");
}

#[test]
fn isolated_root_alpha_is_gamma_alpha0() {
    let (model, data) = isolated_root();
    let mut r = rng(10);
    let mut state = model.init_state(&data, &mut r).unwrap();
    let mut kernels = model.new_kernels(1.0, 0.3);
    kernels[0].freeze();
    let mut accepted = vec![0u64];
    let n = 100_000;
    let trace: Vec<f64> = (0..n)
        .map(|_| {
            model.update_root_beta(&mut state, &mut kernels, &mut r);
            model.update_alphas(&mut state, 0.25, &mut accepted, &mut r);
            assert!(state.alphas[0] > 0.0);
            state.alphas[0]
        })
        .collect();
    let m = trace.iter().sum::<f64>() / n as f64;
    let se = gdp_core::diagnostics::batch_means_se(&trace);
    assert!((m - 3.0).abs() < 3.0 * se, "{m} ± {se}");
    let sq: Vec<f64> = trace.iter().map(|x| x * x).collect();
    let m2 = sq.iter().sum::<f64>() / n as f64;
    let se2 = gdp_core::diagnostics::batch_means_se(&sq);
    assert!((m2 - 12.0).abs() < 3.0 * se2, "{m2} ± {se2}");
}

#[test]
fn empty_groups_recover_the_prior() {
    for check in prior_recovery(11, 6, 2.0, 48, 2_500, 500, 100_000) {
        assert!(check.z() < 3.0, "{}: chain {} ± {}, prior {} ± {}", check.name, check.chain_mean, check.chain_se, check.prior_mean, check.prior_se);
    }
}

#[test]
fn gamma_draws_feed_the_alpha_prior() {
    // Sanity check of the forward prior the recovery test compares with.
    let mut r = rng(12);
    let draws: Vec<f64> = (0..100_000).map(|_| ln_gamma_draw(2.0, &mut r).exp()).collect();
    let (m, se) = mean_se(&draws);
    assert!((m - 2.0).abs() < 3.0 * se);
}
