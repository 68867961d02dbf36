//! Blocked Gibbs sampler for the truncated GDP mixture on any graded
//! single-root DAG.
//!
//! Every weight vector other than the root's is the target of exactly one
//! Dirichlet link `w ~ Dir(c · base)`, where `c` is a multiplicity-weighted
//! sum of concentrations. Full conditionals are assembled from these links.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::LayeredDag;
use crate::dist::{
    categorical_from_logs, ln_dirichlet_draw, ln_dirichlet_log_measure, ln_gamma_density, log_sum_exp, scaled_log,
    standard_normal, LN_MIN_DIRICHLET_PARAM,
};
use crate::model::{
    alpha_prior_shape, niw_posterior_from_stats, niw_sample, sample_alphas, AlphaVector, GaussianComponent, GdpConfig,
    GroupedDataset, ModelError, NiwParams, SuffStats,
};
use crate::prior::{sample_finite_gdp_ln, LogWeightSet, PriorError};
use crate::simplex::{SimplexError, SimplexKernel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GibbsError {
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("group {group}, observation {index}: every component has zero mass")]
    AllZeroMass { group: usize, index: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// Location of a weight vector in a [`LogWeightSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightSlot {
    Beta(usize),
    /// Hidden weights of `node` at `generation` (1 = nearest the node).
    Hidden { node: usize, generation: usize },
}

impl LogWeightSet {
    pub fn get(&self, slot: WeightSlot) -> &[f64] {
        match slot {
            WeightSlot::Beta(j) => &self.ln_beta[j],
            WeightSlot::Hidden { node, generation } => &self.ln_hidden[node][generation - 1],
        }
    }

    pub fn get_mut(&mut self, slot: WeightSlot) -> &mut Vec<f64> {
        match slot {
            WeightSlot::Beta(j) => &mut self.ln_beta[j],
            WeightSlot::Hidden { node, generation } => &mut self.ln_hidden[node][generation - 1],
        }
    }
}

/// `target ~ Dir(c · base)` with `c = Σ multiplicity · α_node`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletLink {
    pub target: WeightSlot,
    pub base: WeightSlot,
    pub conc_terms: Vec<(usize, f64)>,
}

impl DirichletLink {
    pub fn concentration(&self, alpha: &[f64]) -> f64 {
        self.conc_terms.iter().map(|&(n, m)| m * alpha[n]).sum()
    }

    fn concentration_with(&self, alpha: &[f64], node: usize, value: f64) -> f64 {
        self.conc_terms
            .iter()
            .map(|&(n, m)| m * if n == node { value } else { alpha[n] })
            .sum()
    }

    pub fn involves(&self, node: usize) -> bool {
        self.conc_terms.iter().any(|&(n, _)| n == node)
    }
}

/// One block of a Gibbs sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStep {
    Labels,
    Atoms,
    NonRootBetas,
    RootBeta,
    Hidden(WeightSlot),
    Alpha(usize),
}

/// The model structure shared by all chains: DAG, priors and links.
#[derive(Debug, Clone)]
pub struct GdpModel {
    ldag: LayeredDag,
    truncation: usize,
    alpha0: f64,
    niw: NiwParams,
    links: Vec<DirichletLink>,
    /// Metropolis-updated vectors: the root weights, then hidden vectors
    /// from the root side inward, node by node in topological order.
    mh_slots: Vec<WeightSlot>,
    upstream: Vec<Option<usize>>,
    downstream: Vec<Vec<usize>>,
    alpha_links: Vec<Vec<usize>>,
}

impl GdpModel {
    pub fn new(ldag: LayeredDag, truncation: usize, alpha0: f64, niw: NiwParams) -> Result<Self, GibbsError> {
        if truncation < 2 {
            return Err(GibbsError::ConfigMismatch(format!("truncation {truncation} < 2")));
        }
        niw.validate()?;
        let root = ldag.root();
        let mut links = Vec::new();
        let mut mh_slots = vec![WeightSlot::Beta(root)];
        for &j in ldag.topological_order() {
            if j == root {
                continue;
            }
            let chain = ldag.hypernode_chain(j).map_err(PriorError::from)?;
            let mut base = WeightSlot::Beta(root);
            for g in (1..=chain.len()).rev() {
                let target = WeightSlot::Hidden { node: j, generation: g };
                let conc_terms = chain
                    .generation(g)
                    .ancestors
                    .iter()
                    .map(|(a, m)| (a, m as f64))
                    .collect();
                links.push(DirichletLink {
                    target,
                    base,
                    conc_terms,
                });
                mh_slots.push(target);
                base = target;
            }
            links.push(DirichletLink {
                target: WeightSlot::Beta(j),
                base,
                conc_terms: vec![(j, 1.0)],
            });
        }
        let mut model = Self {
            ldag,
            truncation,
            alpha0,
            niw,
            links,
            mh_slots,
            upstream: Vec::new(),
            downstream: Vec::new(),
            alpha_links: Vec::new(),
        };
        model.upstream = model
            .mh_slots
            .iter()
            .map(|&s| model.links.iter().position(|l| l.target == s))
            .collect();
        model.downstream = model
            .mh_slots
            .iter()
            .map(|&s| (0..model.links.len()).filter(|&i| model.links[i].base == s).collect())
            .collect();
        model.alpha_links = (0..model.ldag.node_count())
            .map(|j| (0..model.links.len()).filter(|&i| model.links[i].involves(j)).collect())
            .collect();
        Ok(model)
    }

    pub fn from_config(ldag: LayeredDag, config: &GdpConfig) -> Result<Self, GibbsError> {
        config.validate()?;
        Self::new(ldag, config.truncation, config.alpha0, config.niw.clone())
    }

    pub fn ldag(&self) -> &LayeredDag {
        &self.ldag
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn niw(&self) -> &NiwParams {
        &self.niw
    }

    pub fn links(&self) -> &[DirichletLink] {
        &self.links
    }

    /// Vectors updated by simplex Metropolis–Hastings, root weights first.
    pub fn mh_slots(&self) -> &[WeightSlot] {
        &self.mh_slots
    }

    /// The order of blocks in one full sweep.
    pub fn sweep_plan(&self) -> Vec<SweepStep> {
        let mut plan = vec![SweepStep::Labels, SweepStep::Atoms, SweepStep::NonRootBetas, SweepStep::RootBeta];
        plan.extend(self.mh_slots[1..].iter().map(|&s| SweepStep::Hidden(s)));
        plan.extend(self.ldag.topological_order().iter().map(|&j| SweepStep::Alpha(j)));
        plan
    }

    fn mh_index(&self, slot: WeightSlot) -> Option<usize> {
        self.mh_slots.iter().position(|&s| s == slot)
    }

    /// The link whose target is `β_j`.
    fn beta_link(&self, j: usize) -> &DirichletLink {
        self.links
            .iter()
            .find(|l| l.target == WeightSlot::Beta(j))
            .expect("every non-root node has a weight link")
    }

    fn check_dataset(&self, data: &GroupedDataset) -> Result<(), GibbsError> {
        data.check_alignment(&self.ldag)?;
        if data.dim() != self.niw.dim() {
            return Err(GibbsError::ConfigMismatch(format!(
                "data dimension {} but base measure dimension {}",
                data.dim(),
                self.niw.dim()
            )));
        }
        Ok(())
    }

    // ----- log targets -------------------------------------------------

    /// Unnormalized log full conditional of the root weights at the
    /// log-weights `value`, with respect to `Π dβ_l / β_l`.
    pub fn log_target_root_beta(&self, state: &ChainState, value: &[f64]) -> f64 {
        let root = self.ldag.root();
        let a = state.alphas[root] / self.truncation as f64;
        let counts = &state.counts[root];
        let mut acc = 0.0;
        for (l, &x) in value.iter().enumerate() {
            acc += counts[l] as f64 * x + scaled_log(a.ln().max(LN_MIN_DIRICHLET_PARAM), x);
        }
        for &i in &self.downstream[0] {
            let link = &self.links[i];
            acc += ln_dirichlet_log_measure(state.weights.get(link.target), link.concentration(&state.alphas), value);
        }
        acc
    }

    /// Unnormalized log full conditional of a hidden weight vector at the
    /// log-weights `value`, with respect to `Π dν_l / ν_l`.
    pub fn log_target_hidden(&self, state: &ChainState, slot: WeightSlot, value: &[f64]) -> f64 {
        let k = self.mh_index(slot).expect("slot is a hidden weight vector");
        self.log_target_mh(state, k, value)
    }

    fn log_target_mh(&self, state: &ChainState, k: usize, value: &[f64]) -> f64 {
        if k == 0 {
            return self.log_target_root_beta(state, value);
        }
        let up = &self.links[self.upstream[k].expect("hidden vectors have a prior link")];
        let mut acc = ln_dirichlet_log_measure(value, up.concentration(&state.alphas), state.weights.get(up.base));
        for &i in &self.downstream[k] {
            let link = &self.links[i];
            acc += ln_dirichlet_log_measure(state.weights.get(link.target), link.concentration(&state.alphas), value);
        }
        acc
    }

    /// Unnormalized log full conditional of `α_node` at `value`.
    pub fn log_target_alpha(&self, state: &ChainState, node: usize, value: f64) -> f64 {
        if !(value > 0.0 && value.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let alpha = &state.alphas;
        let mut acc = ln_gamma_density(value, alpha_prior_shape(&self.ldag, self.alpha0, node, alpha));
        for &c in self.ldag.children(node) {
            let shape: f64 = self
                .ldag
                .parents(c)
                .iter()
                .map(|&p| if p == node { value } else { alpha[p] })
                .sum();
            acc += ln_gamma_density(alpha[c], shape);
        }
        for &i in &self.alpha_links[node] {
            let link = &self.links[i];
            acc += ln_dirichlet_log_measure(
                state.weights.get(link.target),
                link.concentration_with(alpha, node, value),
                state.weights.get(link.base),
            );
        }
        if node == self.ldag.root() {
            let uniform = vec![-(self.truncation as f64).ln(); self.truncation];
            acc += ln_dirichlet_log_measure(&state.weights.ln_beta[node], value, &uniform);
        }
        acc
    }

    // ----- state ---------------------------------------------------------

    /// Draws an initial state from the prior; labels come from each group's
    /// weights.
    pub fn init_state<R: Rng + ?Sized>(&self, data: &GroupedDataset, rng: &mut R) -> Result<ChainState, GibbsError> {
        self.check_dataset(data)?;
        let alphas = sample_alphas(&self.ldag, self.alpha0, rng);
        let weights = sample_finite_gdp_ln(&self.ldag, &alphas, self.truncation, rng)?;
        let labels: Vec<Vec<usize>> = (0..data.group_count())
            .map(|j| {
                (0..data.group(j).len())
                    .map(|_| categorical_from_logs(&weights.ln_beta[j], rng).expect("log-weights are finite"))
                    .collect()
            })
            .collect();
        let atoms = (0..self.truncation)
            .map(|_| niw_sample(&self.niw, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let counts = recount(self.ldag.node_count(), self.truncation, &labels);
        Ok(ChainState {
            atoms,
            labels,
            weights,
            alphas,
            counts,
        })
    }

    /// `P(z = l | x, β_j, φ)` for one observation of group `j`.
    pub fn label_probabilities(&self, state: &ChainState, j: usize, x: &[f64]) -> Vec<f64> {
        let logs: Vec<f64> = (0..self.truncation)
            .map(|l| state.weights.ln_beta[j][l] + state.atoms[l].ln_density_unchecked(x))
            .collect();
        let z = log_sum_exp(&logs);
        logs.iter().map(|v| (v - z).exp()).collect()
    }

    // ----- updates -------------------------------------------------------

    pub fn update_labels<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        data: &GroupedDataset,
        rng: &mut R,
    ) -> Result<(), GibbsError> {
        let mut logs = vec![0.0; self.truncation];
        for j in 0..data.group_count() {
            let ln_beta = &state.weights.ln_beta[j];
            for (i, x) in data.points(j).enumerate() {
                for l in 0..self.truncation {
                    logs[l] = ln_beta[l] + state.atoms[l].ln_density_unchecked(x);
                }
                let z = categorical_from_logs(&logs, rng).ok_or(GibbsError::AllZeroMass { group: j, index: i })?;
                let old = state.labels[j][i];
                if z != old {
                    state.counts[j][old] -= 1;
                    state.counts[j][z] += 1;
                    state.labels[j][i] = z;
                }
            }
        }
        Ok(())
    }

    /// Redraws every atom from its NIW posterior given the observations of
    /// all groups assigned to it.
    pub fn update_atoms<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        data: &GroupedDataset,
        rng: &mut R,
    ) -> Result<(), GibbsError> {
        let d = data.dim();
        let mut stats: Vec<SuffStats> = (0..self.truncation).map(|_| SuffStats::empty(d)).collect();
        for j in 0..data.group_count() {
            for (x, &z) in data.points(j).zip(&state.labels[j]) {
                let s = &mut stats[z];
                s.n += 1;
                for (m, v) in s.mean.iter_mut().zip(x) {
                    *m += v;
                }
            }
        }
        for s in &mut stats {
            if s.n > 0 {
                let n = s.n as f64;
                s.mean.iter_mut().for_each(|m| *m /= n);
            }
        }
        for j in 0..data.group_count() {
            for (x, &z) in data.points(j).zip(&state.labels[j]) {
                let s = &mut stats[z];
                for a in 0..d {
                    let da = x[a] - s.mean[a];
                    for b in 0..d {
                        s.scatter[a * d + b] += da * (x[b] - s.mean[b]);
                    }
                }
            }
        }
        for (l, s) in stats.iter().enumerate() {
            let post = niw_posterior_from_stats(&self.niw, s)?;
            state.atoms[l] = niw_sample(&post, rng)?;
        }
        Ok(())
    }

    /// Conjugate draw `β_j ~ Dir(m_j + α_j h_j)` for every non-root node.
    pub fn update_nonroot_betas<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        let root = self.ldag.root();
        let mut ln_params = vec![0.0; self.truncation];
        for &j in self.ldag.topological_order() {
            if j == root {
                continue;
            }
            let link = self.beta_link(j);
            let ln_a = state.alphas[j].ln();
            let base = state.weights.get(link.base);
            for l in 0..self.truncation {
                let prior = (ln_a + base[l]).max(LN_MIN_DIRICHLET_PARAM);
                let m = state.counts[j][l];
                ln_params[l] = if m == 0 { prior } else { (m as f64 + prior.exp()).ln() };
            }
            state.weights.ln_beta[j] = ln_dirichlet_draw(&ln_params, rng);
        }
    }

    fn update_mh_slot<R: Rng + ?Sized>(&self, state: &mut ChainState, kernels: &mut [SimplexKernel], k: usize, rng: &mut R) {
        let slot = self.mh_slots[k];
        let mut x = state.weights.get(slot).to_vec();
        {
            let view = &*state;
            kernels[k].sweep(&mut x, |v| self.log_target_mh(view, k, v), rng);
        }
        *state.weights.get_mut(slot) = x;
    }

    /// One simplex-sampler sweep on the root weights.
    pub fn update_root_beta<R: Rng + ?Sized>(&self, state: &mut ChainState, kernels: &mut [SimplexKernel], rng: &mut R) {
        self.update_mh_slot(state, kernels, 0, rng);
    }

    /// One simplex-sampler sweep on every hidden vector, root side first.
    pub fn update_hidden_weights<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        kernels: &mut [SimplexKernel],
        rng: &mut R,
    ) {
        for k in 1..self.mh_slots.len() {
            self.update_mh_slot(state, kernels, k, rng);
        }
    }

    /// Log-scale random-walk Metropolis step on every concentration.
    /// `accepted[j]` is incremented when node `j` moves.
    pub fn update_alphas<R: Rng + ?Sized>(&self, state: &mut ChainState, step: f64, accepted: &mut [u64], rng: &mut R) {
        for &j in self.ldag.topological_order() {
            let current = state.alphas[j];
            let proposal = current * (step * standard_normal(rng)).exp();
            if !(proposal > 0.0 && proposal.is_finite()) {
                continue;
            }
            let log_ratio = self.log_target_alpha(state, j, proposal) - self.log_target_alpha(state, j, current)
                + proposal.ln()
                - current.ln();
            if log_ratio.is_nan() {
                continue;
            }
            if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
                state.alphas.set(j, proposal);
                accepted[j] += 1;
            }
        }
    }

    /// `Σ_j Σ_i log Σ_l β_jl f(x_ji | φ_l)`.
    pub fn mixture_loglik(&self, state: &ChainState, data: &GroupedDataset) -> f64 {
        let mut logs = vec![0.0; self.truncation];
        let mut total = 0.0;
        for j in 0..data.group_count() {
            let ln_beta = &state.weights.ln_beta[j];
            for x in data.points(j) {
                for l in 0..self.truncation {
                    logs[l] = ln_beta[l] + state.atoms[l].ln_density_unchecked(x);
                }
                total += log_sum_exp(&logs);
            }
        }
        total
    }

    pub fn new_kernels(&self, initial_scale: f64, target_acceptance: f64) -> Vec<SimplexKernel> {
        self.mh_slots
            .iter()
            .map(|_| SimplexKernel::new(self.truncation, initial_scale, target_acceptance))
            .collect()
    }

    /// Runs every block of [`Self::sweep_plan`] once.
    pub fn sweep<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        data: &GroupedDataset,
        kernels: &mut [SimplexKernel],
        alpha_step: f64,
        alpha_accepted: &mut [u64],
        rng: &mut R,
    ) -> Result<(), GibbsError> {
        self.update_labels(state, data, rng)?;
        self.update_atoms(state, data, rng)?;
        self.update_nonroot_betas(state, rng);
        self.update_root_beta(state, kernels, rng);
        self.update_hidden_weights(state, kernels, rng);
        self.update_alphas(state, alpha_step, alpha_accepted, rng);
        Ok(())
    }
}

fn recount(node_count: usize, truncation: usize, labels: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut counts = vec![vec![0; truncation]; node_count];
    for (j, zs) in labels.iter().enumerate() {
        for &z in zs {
            counts[j][z] += 1;
        }
    }
    counts
}

fn exp_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.exp()).collect()
}

/// Full sampler state. Labels are 0-based component indices; the hidden
/// root, if any, has counts but no label vector. Weights are held as logs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub atoms: Vec<GaussianComponent>,
    pub labels: Vec<Vec<usize>>,
    pub weights: LogWeightSet,
    pub alphas: AlphaVector,
    pub counts: Vec<Vec<usize>>,
}

impl ChainState {
    /// Counts rebuilt from the labels.
    pub fn recount(&self) -> Vec<Vec<usize>> {
        recount(self.counts.len(), self.atoms.len(), &self.labels)
    }

    pub fn is_consistent(&self) -> bool {
        let w = &self.weights;
        let simplex_ok = w.ln_beta.iter().chain(w.ln_hidden.iter().flatten()).all(|v| {
            log_sum_exp(v).abs() < 1e-9 && v.iter().all(|&x| x.is_finite() && x <= 0.0)
        });
        self.recount() == self.counts && simplex_ok && self.alphas.iter().all(|&a| a > 0.0 && a.is_finite())
    }

    fn record(&self, iteration: usize, loglik: f64) -> SampleRecord {
        SampleRecord {
            iteration,
            labels: self
                .labels
                .iter()
                .map(|g| g.iter().map(|&z| z as u16).collect())
                .collect(),
            alphas: self.alphas.to_vec(),
            beta: self.weights.ln_beta.iter().map(|v| exp_all(v)).collect(),
            hidden: self
                .weights
                .ln_hidden
                .iter()
                .map(|h| h.iter().map(|v| exp_all(v)).collect())
                .collect(),
            atom_means: self.atoms.iter().map(|a| a.mean().to_vec()).collect(),
            atom_covariances: self.atoms.iter().map(|a| a.covariance().to_vec()).collect(),
            loglik,
        }
    }
}

/// Compact projection of a retained state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub iteration: usize,
    pub labels: Vec<Vec<u16>>,
    pub alphas: Vec<f64>,
    pub beta: Vec<Vec<f64>>,
    pub hidden: Vec<Vec<Vec<f64>>>,
    pub atom_means: Vec<Vec<f64>>,
    pub atom_covariances: Vec<Vec<f64>>,
    pub loglik: f64,
}

impl SampleRecord {
    /// Labels of all observations, groups concatenated in node order.
    pub fn flat_labels(&self) -> Vec<u16> {
        self.labels.iter().flatten().copied().collect()
    }
}

/// Post-burn-in Metropolis acceptance rates.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub root_beta: f64,
    /// `(node, generation, rate)` for every hidden vector.
    pub hidden: Vec<(usize, usize, f64)>,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSamples {
    pub chain: usize,
    pub seed: u64,
    pub records: Vec<SampleRecord>,
    pub loglik_trace: Vec<f64>,
    pub acceptance: AcceptanceReport,
}

/// Runs one chain with the schedule and proposal settings of `config`.
pub fn run_chain(
    model: &GdpModel,
    data: &GroupedDataset,
    config: &GdpConfig,
    chain: usize,
    seed: u64,
) -> Result<ChainSamples, GibbsError> {
    config.validate()?;
    if config.truncation != model.truncation() {
        return Err(GibbsError::ConfigMismatch("truncation differs from the model".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = model.init_state(data, &mut rng)?;
    let p = &config.proposal;
    let mut kernels = model.new_kernels(p.simplex_step, p.target_acceptance);
    let n = model.ldag().node_count();
    let mut alpha_accepted = vec![0u64; n];
    let sched = &config.mcmc;
    if sched.burn_in == 0 {
        kernels.iter_mut().for_each(SimplexKernel::freeze);
    }
    let mut records = Vec::with_capacity(sched.kept());
    for it in 0..sched.iterations {
        model.sweep(&mut state, data, &mut kernels, p.alpha_step, &mut alpha_accepted, &mut rng)?;
        if it < sched.burn_in {
            if (it + 1) % p.adapt_window == 0 {
                for k in &mut kernels {
                    k.adapt_from_window()?;
                }
            }
            if it + 1 == sched.burn_in {
                for k in &mut kernels {
                    k.freeze();
                    k.reset_counters();
                }
                alpha_accepted.iter_mut().for_each(|a| *a = 0);
            }
        } else if (it - sched.burn_in + 1) % sched.thin == 0 {
            let ll = model.mixture_loglik(&state, data);
            records.push(state.record(it + 1, ll));
        }
    }
    let post = (sched.iterations - sched.burn_in) as f64;
    let acceptance = AcceptanceReport {
        root_beta: kernels[0].acceptance_rate(),
        hidden: model.mh_slots()[1..]
            .iter()
            .zip(&kernels[1..])
            .map(|(s, k)| match *s {
                WeightSlot::Hidden { node, generation } => (node, generation, k.acceptance_rate()),
                WeightSlot::Beta(j) => (j, 0, k.acceptance_rate()),
            })
            .collect(),
        alphas: alpha_accepted.iter().map(|&a| a as f64 / post).collect(),
    };
    Ok(ChainSamples {
        chain,
        seed,
        loglik_trace: records.iter().map(|r| r.loglik).collect(),
        records,
        acceptance,
    })
}

/// Runs `config.mcmc.chains` chains in parallel with seeds
/// `config.mcmc.seed + index`; results are in chain order.
pub fn run_chains(model: &GdpModel, data: &GroupedDataset, config: &GdpConfig) -> Result<Vec<ChainSamples>, GibbsError> {
    (0..config.mcmc.chains)
        .into_par_iter()
        .map(|c| run_chain(model, data, config, c, config.mcmc.seed.wrapping_add(c as u64)))
        .collect()
}

/// All retained records of all chains, in chain order.
pub fn pooled(chains: &[ChainSamples]) -> Vec<&SampleRecord> {
    chains.iter().flat_map(|c| c.records.iter()).collect()
}
