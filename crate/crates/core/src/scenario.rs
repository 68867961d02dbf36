//! Synthetic-data scenarios for the 8-group experimental DAG.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{McmcSchedule, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSource {
    /// One weight vector per group, over the clusters.
    Fixed(Vec<Vec<f64>>),
    /// Weights drawn from the truncated GDP prior with one component per
    /// cluster and concentrations from the gamma-DAG prior.
    Prior { alpha0: f64 },
}

/// A Gaussian mixture per group with shared cluster means and
/// group-specific covariances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub means: Vec<Vec<f64>>,
    /// Row-major covariance per group.
    pub covariances: Vec<Vec<f64>>,
    pub weights: WeightSource,
    pub sizes: Vec<usize>,
}

impl ScenarioSpec {
    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let d = self.dim();
        if d == 0 {
            return Err(ModelError::InvalidParameter("scenario has no clusters".into()));
        }
        for m in &self.means {
            if m.len() != d {
                return Err(ModelError::DimensionMismatch { expected: d, found: m.len() });
            }
        }
        for c in &self.covariances {
            if c.len() != d * d {
                return Err(ModelError::DimensionMismatch {
                    expected: d * d,
                    found: c.len(),
                });
            }
        }
        if self.covariances.len() != self.sizes.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.sizes.len(),
                found: self.covariances.len(),
            });
        }
        match &self.weights {
            WeightSource::Fixed(w) => {
                for row in w {
                    if row.len() != self.means.len() {
                        return Err(ModelError::DimensionMismatch {
                            expected: self.means.len(),
                            found: row.len(),
                        });
                    }
                    let total: f64 = row.iter().sum();
                    if row.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > 1e-12 {
                        return Err(ModelError::InvalidParameter("weights must lie on the simplex".into()));
                    }
                }
            }
            WeightSource::Prior { alpha0 } => {
                if !(*alpha0 > 0.0 && alpha0.is_finite()) {
                    return Err(ModelError::InvalidParameter(format!("alpha0 = {alpha0}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
}

/// A named scenario with the sampler settings it is fitted with.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedScenario {
    pub spec: ScenarioSpec,
    pub truncation: usize,
    pub alpha0: f64,
    pub paper_schedule: McmcSchedule,
    pub desk_schedule: McmcSchedule,
}

pub const SIZE_GRIDS: [(&str, [usize; 8]); 4] = [
    ("small", [40, 30, 30, 35, 25, 30, 25, 30]),
    ("moderate", [80, 70, 70, 75, 83, 88, 92, 88]),
    ("large", [150, 160, 180, 170, 155, 175, 185, 145]),
    ("unbalanced", [350, 30, 40, 45, 25, 25, 35, 35]),
];

pub const EASY_MEANS: [[f64; 2]; 4] = [[-2.0, -5.0], [0.0, 0.0], [-3.0, 3.0], [3.0, -3.0]];

pub const DIFFICULT_MEANS: [[f64; 2]; 10] = [
    [-2.5, 0.0],
    [0.0, 0.0],
    [2.5, 0.0],
    [2.5, -2.5],
    [-3.0, -3.0],
    [2.0, 2.0],
    [-2.0, 5.0],
    [5.0, 8.0],
    [-5.0, -8.0],
    [8.0, -8.0],
];

/// Row-major 2×2 covariance of each group.
pub const GROUP_COVARIANCES: [[f64; 4]; 8] = [
    [0.8, 0.3, 0.3, 0.8],
    [0.85, 0.25, 0.25, 0.85],
    [1.0, 0.1, 0.1, 1.0],
    [0.8, -0.1, -0.1, 0.8],
    [0.8, -0.2, -0.2, 0.9],
    [0.8, 0.0, 0.0, 0.8],
    [0.75, 0.25, 0.25, 0.75],
    [1.1, 0.1, 0.1, 1.1],
];

/// Printed weights of the four top groups in the difficult scenario. The
/// rounded rows do not sum exactly to one.
pub const DIFFICULT_TOP_WEIGHTS: [[f64; 10]; 4] = [
    [0.100; 10],
    [0.167, 0.167, 0.167, 0.167, 0.167, 0.056, 0.056, 0.056, 0.000, 0.000],
    [0.095, 0.095, 0.095, 0.000, 0.000, 0.143, 0.143, 0.143, 0.143, 0.143],
    [0.030, 0.030, 0.030, 0.182, 0.182, 0.182, 0.182, 0.182, 0.000, 0.000],
];

fn normalized(row: &[f64]) -> Vec<f64> {
    let total: f64 = row.iter().sum();
    row.iter().map(|x| x / total).collect()
}

fn mean_of(rows: &[&Vec<f64>]) -> Vec<f64> {
    let k = rows[0].len();
    let mut m = vec![0.0; k];
    for r in rows {
        for (a, b) in m.iter_mut().zip(r.iter()) {
            *a += b / rows.len() as f64;
        }
    }
    normalized(&m)
}

/// Group weights of the difficult scenario: normalized top rows, and the
/// parent average for groups 5 through 8.
pub fn difficult_weights() -> Vec<Vec<f64>> {
    let mut w: Vec<Vec<f64>> = DIFFICULT_TOP_WEIGHTS.iter().map(|r| normalized(r)).collect();
    let g5 = mean_of(&[&w[1], &w[3]]);
    let g6 = mean_of(&[&w[1], &w[2]]);
    let g7 = mean_of(&[&w[2], &w[3]]);
    let g8 = mean_of(&[&g5, &g6, &g7]);
    w.extend([g5, g6, g7, g8]);
    w
}

fn schedule(iterations: usize, burn_in: usize, thin: usize) -> McmcSchedule {
    McmcSchedule {
        iterations,
        burn_in,
        thin,
        ..McmcSchedule::default()
    }
}

/// Desk-scale schedule used unless the published one is requested.
pub fn desk_schedule() -> McmcSchedule {
    schedule(3_000, 1_000, 1)
}

pub fn scenario_names() -> Vec<String> {
    ["easy", "difficult"]
        .iter()
        .flat_map(|k| SIZE_GRIDS.iter().map(move |(s, _)| format!("{k}-{s}")))
        .collect()
}

/// Looks up `easy-<size>` or `difficult-<size>`.
pub fn by_name(name: &str) -> Result<NamedScenario, ScenarioError> {
    let unknown = || ScenarioError::UnknownScenario(name.to_string());
    let (kind, size) = name.split_once('-').ok_or_else(unknown)?;
    let sizes = SIZE_GRIDS
        .iter()
        .find(|(s, _)| *s == size)
        .map(|(_, v)| v.to_vec())
        .ok_or_else(unknown)?;
    let covariances = GROUP_COVARIANCES.iter().map(|c| c.to_vec()).collect();
    match kind {
        "easy" => Ok(NamedScenario {
            spec: ScenarioSpec {
                name: name.to_string(),
                means: EASY_MEANS.iter().map(|m| m.to_vec()).collect(),
                covariances,
                weights: WeightSource::Prior { alpha0: 5.0 },
                sizes,
            },
            truncation: 10,
            alpha0: 5.0,
            paper_schedule: schedule(15_000, 5_000, 1),
            desk_schedule: desk_schedule(),
        }),
        "difficult" => Ok(NamedScenario {
            spec: ScenarioSpec {
                name: name.to_string(),
                means: DIFFICULT_MEANS.iter().map(|m| m.to_vec()).collect(),
                covariances,
                weights: WeightSource::Fixed(difficult_weights()),
                sizes,
            },
            truncation: 20,
            alpha0: 1.0,
            paper_schedule: schedule(25_000, 15_000, 5),
            desk_schedule: desk_schedule(),
        }),
        _ => Err(unknown()),
    }
}
