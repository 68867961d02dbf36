//! Simulation, fitting and evaluation shared by the subcommands.

use std::time::Instant;

use gdp_core::dag::{Dag, LayeredDag};
use gdp_core::gibbs::{run_chains, ChainSamples, GdpModel, SampleRecord};
use gdp_core::metrics::{coclustering, dahl_point_estimate, evaluate, kmeans, CoclusteringMatrix, MetricReport};
use gdp_core::model::{GdpConfig, GroupedDataset};
use gdp_core::prior::generate_synthetic;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, Resolved};
use crate::error::{BenchError, Result};
use crate::plot::quantile;

pub const METHODS: [Mode; 3] = [Mode::Gdp, Mode::HdpFork, Mode::Kmeans];

pub fn simulate(resolved: &Resolved, seed: u64) -> Result<GroupedDataset> {
    let scenario = resolved
        .scenario
        .as_ref()
        .ok_or_else(|| BenchError::Config("no scenario to simulate".into()))?;
    let ldag = LayeredDag::from_dag(&resolved.dag)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(generate_synthetic(&ldag, &scenario.spec, &mut rng)?)
}

/// The DAG a mixture fit runs on: the configured one, or a hidden root
/// over all groups for the HDP baseline.
pub fn fitting_dag(mode: Mode, dag: &Dag) -> Result<LayeredDag> {
    match mode {
        Mode::Gdp => Ok(LayeredDag::from_dag(dag)?),
        Mode::HdpFork => Ok(LayeredDag::from_dag(&Dag::new(dag.node_count(), &[])?)?),
        Mode::Kmeans => Err(BenchError::Config("k-means has no DAG".into())),
    }
}

pub fn fit_mixture(data: &GroupedDataset, ldag: LayeredDag, gdp: &GdpConfig) -> Result<Vec<ChainSamples>> {
    data.check_alignment(&ldag)?;
    let model = GdpModel::from_config(ldag, gdp)?;
    Ok(run_chains(&model, data, gdp)?)
}

/// Least-squares point estimate over pooled records.
#[derive(Debug, Clone)]
pub struct PointEstimate {
    pub labels: Vec<Vec<usize>>,
    /// Index into the pooled records.
    pub record: usize,
    pub loss: f64,
    pub matrix: CoclusteringMatrix,
}

pub fn point_estimate(records: &[&SampleRecord]) -> Result<PointEstimate> {
    let flat: Vec<Vec<u16>> = records.iter().map(|r| r.flat_labels()).collect();
    let matrix = coclustering(&flat)?;
    let best = dahl_point_estimate(&flat, &matrix)?;
    let labels = records[best.index]
        .labels
        .iter()
        .map(|g| g.iter().map(|&z| usize::from(z)).collect())
        .collect();
    Ok(PointEstimate {
        labels,
        record: best.index,
        loss: best.loss,
        matrix,
    })
}

/// k-means within each group with `k = min(truncation, group size)`.
/// Labels are offset by `group × truncation` so clusters are never shared
/// between groups.
pub fn kmeans_per_group(data: &GroupedDataset, truncation: usize, max_iters: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..data.group_count())
        .map(|j| {
            let points: Vec<&[f64]> = data.points(j).collect();
            if points.is_empty() {
                return Ok(Vec::new());
            }
            let k = truncation.min(points.len());
            let r = kmeans(&points, k, max_iters, &mut rng)?;
            Ok(r.labels.into_iter().map(|z| z + j * truncation).collect())
        })
        .collect()
}

pub fn grouped_points(data: &GroupedDataset) -> Vec<Vec<&[f64]>> {
    (0..data.group_count()).map(|j| data.points(j).collect()).collect()
}

pub fn truth(data: &GroupedDataset) -> Option<Vec<Vec<usize>>> {
    data.groups().iter().map(|g| g.labels().map(<[usize]>::to_vec)).collect()
}

/// Fits one method to `data` and scores its point estimate.
pub fn fit_and_score(resolved: &Resolved, data: &GroupedDataset, method: Mode, seed: u64) -> Result<MetricReport> {
    let start = Instant::now();
    let estimate = match method {
        Mode::Kmeans => kmeans_per_group(data, resolved.gdp.truncation, resolved.kmeans_max_iters, seed)?,
        _ => {
            let mut gdp = resolved.gdp.clone();
            gdp.mcmc.seed = seed;
            let chains = fit_mixture(data, fitting_dag(method, &resolved.dag)?, &gdp)?;
            point_estimate(&gdp_core::gibbs::pooled(&chains))?.labels
        }
    };
    let runtime = start.elapsed().as_secs_f64();
    let t = truth(data);
    Ok(evaluate(method.name(), seed, &grouped_points(data), &estimate, t.as_deref(), Some(runtime))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateReport {
    pub index: usize,
    pub seed: u64,
    pub reports: Vec<MetricReport>,
}

impl ReplicateReport {
    pub fn without_runtimes(&self) -> Self {
        let mut r = self.clone();
        r.reports.iter_mut().for_each(|m| m.runtime_seconds = None);
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub pooled_ari_median: f64,
    pub pooled_ari_q25: f64,
    pub pooled_ari_q75: f64,
    pub group_ari_median: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub scenario: String,
    pub config_hash: String,
    pub base_seed: u64,
    pub truncation: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub replicates: Vec<ReplicateReport>,
    pub summary: Vec<MethodSummary>,
}

impl ExperimentReport {
    pub fn summary_for(&self, method: Mode) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method.name())
    }

    /// Copy without wall-clock times, for byte-stable output.
    pub fn without_runtimes(&self) -> Self {
        let mut r = self.clone();
        r.replicates = r.replicates.iter().map(ReplicateReport::without_runtimes).collect();
        r
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn summarize(replicates: &[ReplicateReport], method: Mode) -> MethodSummary {
    let reports: Vec<&MetricReport> = replicates
        .iter()
        .flat_map(|r| r.reports.iter().filter(|m| m.method == method.name()))
        .collect();
    let pooled = sorted(reports.iter().filter_map(|m| m.pooled_ari).collect());
    let groups = reports.first().and_then(|m| m.group_ari.as_ref()).map_or(0, Vec::len);
    let group_ari_median = (0..groups)
        .map(|j| {
            let v = sorted(reports.iter().filter_map(|m| m.group_ari.as_ref().map(|g| g[j])).collect());
            quantile(&v, 0.5)
        })
        .collect();
    MethodSummary {
        method: method.name().to_string(),
        pooled_ari_median: quantile(&pooled, 0.5),
        pooled_ari_q25: quantile(&pooled, 0.25),
        pooled_ari_q75: quantile(&pooled, 0.75),
        group_ari_median,
    }
}

/// Simulates replicate `index` with seed `base + index` and scores every
/// method on it.
pub fn run_replicate(resolved: &Resolved, index: usize) -> Result<ReplicateReport> {
    let seed = resolved.seed.wrapping_add(index as u64);
    let data = simulate(resolved, seed)?;
    let reports = METHODS
        .iter()
        .map(|&m| fit_and_score(resolved, &data, m, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicateReport { index, seed, reports })
}

pub fn run_experiment(resolved: &Resolved) -> Result<ExperimentReport> {
    let scenario = resolved
        .scenario
        .as_ref()
        .ok_or_else(|| BenchError::Config("compare needs a scenario".into()))?;
    let replicates = (0..resolved.replicates)
        .into_par_iter()
        .map(|r| run_replicate(resolved, r))
        .collect::<Result<Vec<_>>>()?;
    let summary = METHODS.iter().map(|&m| summarize(&replicates, m)).collect();
    let m = &resolved.gdp.mcmc;
    Ok(ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: scenario.name.clone(),
        config_hash: resolved.config_hash.clone(),
        base_seed: resolved.seed,
        truncation: resolved.gdp.truncation,
        iterations: m.iterations,
        burn_in: m.burn_in,
        thin: m.thin,
        replicates,
        summary,
    })
}
