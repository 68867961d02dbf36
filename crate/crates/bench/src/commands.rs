//! The five subcommands. Each writes only inside its output directory.

use std::path::{Path, PathBuf};

use gdp_core::gibbs::SampleRecord;
use gdp_core::metrics::{adjusted_rand_index, evaluate, MetricReport};
use gdp_core::model::GroupedDataset;
use serde::Serialize;

use crate::chains::{chain_file_name, chain_files_in, read_chain, write_chain, ChainFile, ChainHeader, CHAIN_FORMAT, CHAIN_VERSION};
use crate::config::{Mode, Overrides, Resolved, RunConfig};
use crate::data::{
    create_dir, read_dataset, read_json, read_partition, write_dataset, write_json, write_matrix, write_partition,
    write_text,
};
use crate::error::{BenchError, Result};
use crate::experiment::{
    fit_mixture, fitting_dag, grouped_points, kmeans_per_group, point_estimate, run_experiment, simulate, truth,
    ExperimentReport, METHODS,
};
use crate::plot;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub mode: String,
    pub scenario: Option<String>,
    pub truncation: usize,
    pub alpha0: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub group_sizes: Vec<usize>,
    pub dataset: Option<PathBuf>,
}

fn manifest(command: &str, r: &Resolved, group_sizes: Vec<usize>, dataset: Option<PathBuf>) -> Manifest {
    let m = &r.gdp.mcmc;
    Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: r.config_hash.clone(),
        seed: r.seed,
        mode: r.mode.name().to_string(),
        scenario: r.scenario.as_ref().map(|s| s.name.clone()),
        truncation: r.gdp.truncation,
        alpha0: r.gdp.alpha0,
        iterations: m.iterations,
        burn_in: m.burn_in,
        thin: m.thin,
        chains: m.chains,
        group_sizes,
        dataset,
    }
}

/// Loads and resolves a config, then echoes it into `out`.
pub fn prepare(config: &Path, out: &Path, overrides: &Overrides) -> Result<Resolved> {
    let (cfg, text) = RunConfig::load(config)?;
    let resolved = cfg.resolve(&text, overrides)?;
    create_dir(out)?;
    write_text(&out.join("config.toml"), &text)?;
    Ok(resolved)
}

pub fn cmd_simulate(config: &Path, out: &Path, overrides: &Overrides) -> Result<()> {
    let r = prepare(config, out, overrides)?;
    let data = simulate(&r, r.seed)?;
    write_dataset(out, &data)?;
    write_json(&out.join("manifest.json"), &manifest("simulate", &r, data.group_sizes(), None))
}

fn check_schema(r: &Resolved, data: &GroupedDataset) -> Result<()> {
    if data.group_count() != r.dag.node_count() {
        return Err(BenchError::SchemaMismatch(format!(
            "dataset has {} groups but the DAG has {} nodes",
            data.group_count(),
            r.dag.node_count()
        )));
    }
    if data.dim() != r.gdp.niw.dim() {
        return Err(BenchError::SchemaMismatch(format!(
            "dataset has {} columns but the model has dimension {}",
            data.dim(),
            r.gdp.niw.dim()
        )));
    }
    Ok(())
}

/// Fits the configured mode. Without a dataset, the configured scenario is
/// simulated into `out/data` first.
pub fn cmd_fit(config: &Path, data_dir: Option<&Path>, out: &Path, overrides: &Overrides) -> Result<()> {
    let r = prepare(config, out, overrides)?;
    let dataset = match data_dir.map(Path::to_path_buf).or_else(|| r.dataset.clone()) {
        Some(d) => d,
        None => {
            let d = out.join("data");
            write_dataset(&d, &simulate(&r, r.seed)?)?;
            d
        }
    };
    let data = read_dataset(&dataset)?;
    check_schema(&r, &data)?;
    write_json(
        &out.join("manifest.json"),
        &manifest("fit", &r, data.group_sizes(), Some(dataset.clone())),
    )?;
    if r.mode == Mode::Kmeans {
        let labels = kmeans_per_group(&data, r.gdp.truncation, r.kmeans_max_iters, r.seed)?;
        return write_partition(&out.join("partition.csv"), &labels);
    }
    let chains = fit_mixture(&data, fitting_dag(r.mode, &r.dag)?, &r.gdp)?;
    let mut acceptance = Vec::with_capacity(chains.len());
    for c in &chains {
        let header = ChainHeader {
            format: CHAIN_FORMAT.into(),
            version: CHAIN_VERSION,
            chain: c.chain,
            seed: c.seed,
            mode: r.mode.name().into(),
            truncation: r.gdp.truncation,
            group_sizes: data.group_sizes(),
            dim: data.dim(),
            dataset: Some(dataset.clone()),
            acceptance: c.acceptance.clone(),
        };
        write_chain(&out.join(chain_file_name(c.chain)), &header, c)?;
        acceptance.push(c.acceptance.clone());
    }
    write_json(&out.join("acceptance.json"), &acceptance)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Summary {
    pub chains: usize,
    pub records: usize,
    /// Pooled record index of the point estimate.
    pub point_estimate_record: usize,
    pub least_squares_loss: f64,
    pub clusters: usize,
    pub group_ari: Option<Vec<f64>>,
    pub pooled_ari: Option<f64>,
}

fn load_chains(paths: &[PathBuf]) -> Result<Vec<ChainFile>> {
    if paths.is_empty() {
        return Err(BenchError::EmptyChains);
    }
    let chains = paths.iter().map(|p| read_chain(p)).collect::<Result<Vec<_>>>()?;
    let first = &chains[0].header;
    for c in &chains[1..] {
        if c.header.group_sizes != first.group_sizes || c.header.truncation != first.truncation {
            return Err(BenchError::SchemaMismatch("chain files come from different fits".into()));
        }
    }
    if chains.iter().all(|c| c.records.is_empty()) {
        return Err(BenchError::EmptyChains);
    }
    Ok(chains)
}

fn plane(x: &[f64]) -> [f64; 2] {
    [x[0], x.get(1).copied().unwrap_or(0.0)]
}

/// Point estimate, co-clustering matrix, trace panels and per-group
/// scatter plots from the chain files in `chains_dir`.
pub fn cmd_summarize(chains_dir: &Path, data_dir: Option<&Path>, out: &Path) -> Result<Summary> {
    let chains = load_chains(&chain_files_in(chains_dir)?)?;
    create_dir(out)?;
    let records: Vec<&SampleRecord> = chains.iter().flat_map(|c| c.records.iter()).collect();
    let est = point_estimate(&records)?;
    write_partition(&out.join("partition.csv"), &est.labels)?;
    write_matrix(&out.join("coclustering.csv"), est.matrix.size(), |a| est.matrix.row(a).to_vec())?;
    let traces: Vec<(String, Vec<f64>)> = chains
        .iter()
        .map(|c| (format!("chain {} log-likelihood", c.header.chain + 1), c.loglik_trace()))
        .collect();
    write_text(&out.join("trace.svg"), &plot::trace_panels(&traces))?;

    let dataset = data_dir.map(Path::to_path_buf).or_else(|| chains[0].header.dataset.clone());
    let data = match dataset {
        Some(d) => Some(read_dataset(&d)?),
        None => None,
    };
    let mut group_ari = None;
    let mut pooled_ari = None;
    if let Some(data) = &data {
        if data.group_sizes() != chains[0].header.group_sizes {
            return Err(BenchError::SchemaMismatch("dataset does not match the chains".into()));
        }
        let t = truth(data);
        if let Some(t) = &t {
            group_ari = Some(
                est.labels
                    .iter()
                    .zip(t)
                    .map(|(e, t)| adjusted_rand_index(e, t))
                    .collect::<std::result::Result<Vec<_>, _>>()?,
            );
            let flat_e: Vec<usize> = est.labels.iter().flatten().copied().collect();
            let flat_t: Vec<usize> = t.iter().flatten().copied().collect();
            pooled_ari = Some(adjusted_rand_index(&flat_e, &flat_t)?);
        }
        for j in 0..data.group_count() {
            let points: Vec<[f64; 2]> = data.points(j).map(plane).collect();
            let title = match &group_ari {
                Some(a) => format!("group {} (ARI {:.3})", j + 1, a[j]),
                None => format!("group {}", j + 1),
            };
            let svg = plot::scatter(&points, &est.labels[j], &title);
            write_text(&out.join(format!("scatter_group_{}.svg", j + 1)), &svg)?;
        }
    }
    let summary = Summary {
        chains: chains.len(),
        records: records.len(),
        point_estimate_record: est.record,
        least_squares_loss: est.loss,
        clusters: gdp_core::metrics::dense_labels(&records[est.record].flat_labels()).1,
        group_ari,
        pooled_ari,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn ari_boxplot(report: &ExperimentReport) -> String {
    let groups = report
        .replicates
        .first()
        .and_then(|r| r.reports.first())
        .and_then(|m| m.group_ari.as_ref())
        .map_or(0, Vec::len);
    let values = |method: Mode, pick: &dyn Fn(&MetricReport) -> Option<f64>| -> Vec<f64> {
        report
            .replicates
            .iter()
            .flat_map(|r| r.reports.iter().filter(|m| m.method == method.name()))
            .filter_map(pick)
            .collect()
    };
    let label = |m: Mode| match m {
        Mode::Gdp => "GDP".to_string(),
        Mode::HdpFork => "HDP".to_string(),
        Mode::Kmeans => "k-means".to_string(),
    };
    let mut panels = vec![(
        "pooled ARI".to_string(),
        METHODS.iter().map(|&m| (label(m), values(m, &|r| r.pooled_ari))).collect(),
    )];
    for j in 0..groups {
        panels.push((
            format!("group {} ARI", j + 1),
            METHODS
                .iter()
                .map(|&m| (label(m), values(m, &|r| r.group_ari.as_ref().map(|g| g[j]))))
                .collect(),
        ));
    }
    plot::boxplots(&panels)
}

/// Replicated GDP, HDP-fork and k-means comparison.
pub fn cmd_compare(config: &Path, out: &Path, overrides: &Overrides) -> Result<ExperimentReport> {
    let r = prepare(config, out, overrides)?;
    let report = run_experiment(&r)?;
    for rep in &report.replicates {
        let dir = out.join(format!("replicate_{}", rep.index + 1));
        create_dir(&dir)?;
        write_json(&dir.join("metrics.json"), &rep.without_runtimes())?;
    }
    let timings: Vec<(usize, String, Option<f64>)> = report
        .replicates
        .iter()
        .flat_map(|rep| rep.reports.iter().map(move |m| (rep.index + 1, m.method.clone(), m.runtime_seconds)))
        .collect();
    write_json(&out.join("timings.json"), &timings)?;
    write_json(&out.join("report.json"), &report.without_runtimes())?;
    write_text(&out.join("ari_boxplot.svg"), &ari_boxplot(&report))?;
    Ok(report)
}

/// Scores a partition file against a dataset.
pub fn cmd_metrics(data_dir: &Path, partition: &Path, out: Option<&Path>) -> Result<MetricReport> {
    let data = read_dataset(data_dir)?;
    let labels = read_partition(partition)?;
    if labels.iter().map(Vec::len).collect::<Vec<_>>() != data.group_sizes() {
        return Err(BenchError::SchemaMismatch("partition does not match the dataset".into()));
    }
    let t = truth(&data);
    let method = partition.file_stem().and_then(|s| s.to_str()).unwrap_or("partition");
    let report = evaluate(method, 0, &grouped_points(&data), &labels, t.as_deref(), None)?;
    if let Some(out) = out {
        create_dir(out)?;
        write_json(&out.join("metrics.json"), &report)?;
    }
    Ok(report)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    read_json(&dir.join("manifest.json"))
}
