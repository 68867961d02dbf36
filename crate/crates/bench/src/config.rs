//! Run configuration read from a TOML file.

use std::path::{Path, PathBuf};

use gdp_core::dag::Dag;
use gdp_core::model::{GdpConfig, McmcSchedule, NiwParams, ProposalConfig};
use gdp_core::scenario::{self, ScenarioSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Gdp,
    HdpFork,
    Kmeans,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Gdp => "gdp",
            Mode::HdpFork => "hdp-fork",
            Mode::Kmeans => "kmeans",
        }
    }
}

/// Edge list with one-based node ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagSection {
    pub nodes: usize,
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub truncation: Option<usize>,
    pub alpha0: Option<f64>,
    pub niw: Option<NiwParams>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub chains: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    /// A named scenario such as `easy-small`.
    pub scenario: Option<String>,
    pub custom_scenario: Option<ScenarioSpec>,
    /// Directory written by `simulate`, used by `fit` when no scenario is
    /// simulated on the fly.
    pub dataset: Option<PathBuf>,
    pub dag: Option<DagSection>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub paper_scale: Option<bool>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub mcmc: McmcSection,
    pub proposal: Option<ProposalConfig>,
    pub kmeans_max_iters: Option<usize>,
}

/// Command-line flags that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paper_scale: bool,
    pub mode: Option<Mode>,
}

/// A scenario ready to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioChoice {
    pub name: String,
    pub spec: ScenarioSpec,
}

/// Configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub mode: Mode,
    pub seed: u64,
    pub replicates: usize,
    pub paper_scale: bool,
    /// The DAG over the observed groups.
    pub dag: Dag,
    pub scenario: Option<ScenarioChoice>,
    pub dataset: Option<PathBuf>,
    pub gdp: GdpConfig,
    pub kmeans_max_iters: usize,
    /// SHA-256 of the configuration text.
    pub config_hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Reads a config file and returns it with its raw text.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn resolve(&self, text: &str, overrides: &Overrides) -> Result<Resolved> {
        let paper_scale = overrides.paper_scale || self.paper_scale.unwrap_or(false);
        let mode = overrides.mode.unwrap_or(self.mode);
        let seed = overrides.seed.or(self.seed).unwrap_or(1);
        let replicates = self.replicates.unwrap_or(1);
        if replicates == 0 {
            return Err(BenchError::Config("replicates must be at least 1".into()));
        }
        if self.scenario.is_some() && self.custom_scenario.is_some() {
            return Err(BenchError::Config("give either scenario or custom_scenario".into()));
        }

        let (scenario, mut gdp) = if let Some(name) = &self.scenario {
            let named = scenario::by_name(name)?;
            let mut gdp = GdpConfig::new(named.spec.dim());
            gdp.truncation = named.truncation;
            gdp.alpha0 = named.alpha0;
            gdp.mcmc = if paper_scale { named.paper_schedule } else { named.desk_schedule };
            let choice = ScenarioChoice {
                name: name.clone(),
                spec: named.spec,
            };
            (Some(choice), gdp)
        } else if let Some(spec) = &self.custom_scenario {
            spec.validate()?;
            let mut gdp = GdpConfig::new(spec.dim());
            if !paper_scale {
                gdp.mcmc = scenario::desk_schedule();
            }
            let choice = ScenarioChoice {
                name: spec.name.clone(),
                spec: spec.clone(),
            };
            (Some(choice), gdp)
        } else {
            let dim = self.model.niw.as_ref().map_or(2, NiwParams::dim);
            let mut gdp = GdpConfig::new(dim);
            if !paper_scale {
                gdp.mcmc = scenario::desk_schedule();
            }
            (None, gdp)
        };

        if let Some(t) = self.model.truncation {
            gdp.truncation = t;
        }
        if let Some(a) = self.model.alpha0 {
            gdp.alpha0 = a;
        }
        if let Some(niw) = &self.model.niw {
            gdp.niw = niw.clone();
        }
        let m = &self.mcmc;
        gdp.mcmc = McmcSchedule {
            iterations: m.iterations.unwrap_or(gdp.mcmc.iterations),
            burn_in: m.burn_in.unwrap_or(gdp.mcmc.burn_in),
            thin: m.thin.unwrap_or(gdp.mcmc.thin),
            chains: m.chains.unwrap_or(gdp.mcmc.chains),
            seed,
        };
        if let Some(p) = &self.proposal {
            gdp.proposal = p.clone();
        }
        gdp.validate()?;

        let dag = match &self.dag {
            Some(d) => {
                let edges: Vec<(usize, usize)> = d.edges.iter().map(|e| (e[0], e[1])).collect();
                Dag::from_one_based(d.nodes, &edges)?
            }
            None => Dag::experimental(),
        };
        if let Some(s) = &scenario {
            if s.spec.sizes.len() != dag.node_count() {
                return Err(BenchError::SchemaMismatch(format!(
                    "scenario has {} groups but the DAG has {} nodes",
                    s.spec.sizes.len(),
                    dag.node_count()
                )));
            }
            if s.spec.dim() != gdp.niw.dim() {
                return Err(BenchError::SchemaMismatch(format!(
                    "scenario dimension {} differs from the NIW dimension {}",
                    s.spec.dim(),
                    gdp.niw.dim()
                )));
            }
        }
        Ok(Resolved {
            mode,
            seed,
            replicates,
            paper_scale,
            dag,
            scenario,
            dataset: self.dataset.clone(),
            gdp,
            kmeans_max_iters: self.kmeans_max_iters.unwrap_or(100),
            config_hash: sha256_hex(text.as_bytes()),
        })
    }
}
