//! Statistical building blocks: the normal-inverse-Wishart base measure,
//! Gaussian mixture components, grouped datasets, the sampler
//! configuration and the gamma-DAG prior on concentration parameters.

use std::f64::consts::PI;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::LayeredDag;
use crate::dist::{gamma_draw, standard_normal};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not positive definite")]
    CholeskyFailure,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
}

/// Row-major square matrix helpers. Matrices are stored as `Vec<f64>` so
/// they serialize flat and hot loops avoid allocation.
fn to_dmatrix(d: usize, flat: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, flat)
}

fn from_dmatrix(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Normal-inverse-Wishart parameters `NIW(mean, kappa, scale, dof)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiwParams {
    pub mean: Vec<f64>,
    pub kappa: f64,
    /// Row-major `d × d` scale matrix.
    pub scale: Vec<f64>,
    pub dof: f64,
}

impl NiwParams {
    pub fn new(mean: Vec<f64>, kappa: f64, scale: Vec<f64>, dof: f64) -> Result<Self, ModelError> {
        let p = Self {
            mean,
            kappa,
            scale,
            dof,
        };
        p.validate()?;
        Ok(p)
    }

    /// `NIW(0, 0.01, I_d, d)`.
    pub fn weakly_informative(dim: usize) -> Self {
        let mut scale = vec![0.0; dim * dim];
        for i in 0..dim {
            scale[i * dim + i] = 1.0;
        }
        Self {
            mean: vec![0.0; dim],
            kappa: 0.01,
            scale,
            dof: dim as f64,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let d = self.dim();
        if d == 0 {
            return Err(ModelError::InvalidParameter("NIW dimension is zero".into()));
        }
        if self.scale.len() != d * d {
            return Err(ModelError::DimensionMismatch {
                expected: d * d,
                found: self.scale.len(),
            });
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(ModelError::InvalidParameter(format!("kappa = {}", self.kappa)));
        }
        if !(self.dof > d as f64 - 1.0 && self.dof.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "dof = {} must exceed d - 1 = {}",
                self.dof,
                d as f64 - 1.0
            )));
        }
        if to_dmatrix(d, &self.scale).cholesky().is_none() {
            return Err(ModelError::CholeskyFailure);
        }
        Ok(())
    }
}

/// Sufficient statistics of a set of `d`-vectors: count, mean and scatter
/// about the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    pub n: usize,
    pub mean: Vec<f64>,
    /// Row-major `Σ (x − x̄)(x − x̄)ᵀ`.
    pub scatter: Vec<f64>,
}

impl SuffStats {
    pub fn empty(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            scatter: vec![0.0; dim * dim],
        }
    }

    /// Two-pass computation over the rows.
    pub fn from_rows<'a, I>(dim: usize, rows: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = &'a [f64]> + Clone,
    {
        let mut stats = Self::empty(dim);
        for row in rows.clone() {
            if row.len() != dim {
                return Err(ModelError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            stats.n += 1;
            for (m, x) in stats.mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        if stats.n == 0 {
            return Ok(stats);
        }
        for m in &mut stats.mean {
            *m /= stats.n as f64;
        }
        for row in rows {
            for i in 0..dim {
                let di = row[i] - stats.mean[i];
                for j in 0..dim {
                    stats.scatter[i * dim + j] += di * (row[j] - stats.mean[j]);
                }
            }
        }
        Ok(stats)
    }
}

/// Conjugate update of an NIW prior with a batch of observations.
pub fn niw_posterior(prior: &NiwParams, data: &[Vec<f64>]) -> Result<NiwParams, ModelError> {
    let stats = SuffStats::from_rows(prior.dim(), data.iter().map(Vec::as_slice))?;
    niw_posterior_from_stats(prior, &stats)
}

pub fn niw_posterior_from_stats(prior: &NiwParams, stats: &SuffStats) -> Result<NiwParams, ModelError> {
    let d = prior.dim();
    if stats.mean.len() != d {
        return Err(ModelError::DimensionMismatch {
            expected: d,
            found: stats.mean.len(),
        });
    }
    if stats.n == 0 {
        return Ok(prior.clone());
    }
    let n = stats.n as f64;
    let kappa = prior.kappa + n;
    let mean: Vec<f64> = prior
        .mean
        .iter()
        .zip(&stats.mean)
        .map(|(m0, xbar)| (prior.kappa * m0 + n * xbar) / kappa)
        .collect();
    let shrink = prior.kappa * n / kappa;
    let mut scale = prior.scale.clone();
    for i in 0..d {
        let di = stats.mean[i] - prior.mean[i];
        for j in 0..d {
            let dj = stats.mean[j] - prior.mean[j];
            scale[i * d + j] += stats.scatter[i * d + j] + shrink * di * dj;
        }
    }
    Ok(NiwParams {
        mean,
        kappa,
        scale,
        dof: prior.dof + n,
    })
}

/// A multivariate Gaussian with a cached Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    mean: Vec<f64>,
    covariance: Vec<f64>,
    chol: Vec<f64>,
    log_det: f64,
}

impl GaussianComponent {
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self, ModelError> {
        let d = mean.len();
        if covariance.len() != d * d {
            return Err(ModelError::DimensionMismatch {
                expected: d * d,
                found: covariance.len(),
            });
        }
        let chol = to_dmatrix(d, &covariance)
            .cholesky()
            .ok_or(ModelError::CholeskyFailure)?
            .l();
        let log_det = 2.0 * (0..d).map(|i| chol[(i, i)].ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(ModelError::CholeskyFailure);
        }
        Ok(Self {
            mean,
            covariance,
            chol: from_dmatrix(&chol),
            log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major covariance matrix.
    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    /// Row-major lower Cholesky factor of the covariance.
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Log density without a dimension check; `x.len()` must equal `dim()`.
    #[inline]
    pub fn ln_density_unchecked(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        // Forward substitution L y = x − μ, accumulating |y|².
        let mut y = [0.0f64; 8];
        let mut heap;
        let y: &mut [f64] = if d <= 8 {
            &mut y[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut quad = 0.0;
        for i in 0..d {
            let mut v = x[i] - self.mean[i];
            for k in 0..i {
                v -= self.chol[i * d + k] * y[k];
            }
            v /= self.chol[i * d + i];
            y[i] = v;
            quad += v * v;
        }
        -0.5 * (d as f64 * (2.0 * PI).ln() + self.log_det + quad)
    }

    /// Draws one observation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        (0..d)
            .map(|i| self.mean[i] + (0..=i).map(|k| self.chol[i * d + k] * z[k]).sum::<f64>())
            .collect()
    }
}

/// Exact Gaussian log density at `x`.
pub fn gaussian_loglik(x: &[f64], comp: &GaussianComponent) -> Result<f64, ModelError> {
    if x.len() != comp.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: comp.dim(),
            found: x.len(),
        });
    }
    Ok(comp.ln_density_unchecked(x))
}

/// Draws `(μ, Σ)` from `NIW(params)`: `Σ ~ IW(scale, dof)` via the Bartlett
/// decomposition of its inverse, then `μ ~ N(mean, Σ / kappa)`.
pub fn niw_sample<R: Rng + ?Sized>(params: &NiwParams, rng: &mut R) -> Result<GaussianComponent, ModelError> {
    let d = params.dim();
    let scale = to_dmatrix(d, &params.scale);
    let scale_inv = scale
        .cholesky()
        .ok_or(ModelError::CholeskyFailure)?
        .inverse();
    let l = scale_inv
        .cholesky()
        .ok_or(ModelError::CholeskyFailure)?
        .l();
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let chi2 = 2.0 * gamma_draw(0.5 * (params.dof - i as f64), rng);
        a[(i, i)] = chi2.sqrt();
        for j in 0..i {
            a[(i, j)] = standard_normal(rng);
        }
    }
    let la = &l * &a;
    let precision = &la * la.transpose();
    let mut cov = precision
        .cholesky()
        .ok_or(ModelError::CholeskyFailure)?
        .inverse();
    symmetrize(&mut cov);
    let cov_chol = cov.clone().cholesky().ok_or(ModelError::CholeskyFailure)?.l();
    let z = DVector::from_fn(d, |_, _| standard_normal(rng));
    let shift = cov_chol * z / params.kappa.sqrt();
    let mean: Vec<f64> = params.mean.iter().zip(shift.iter()).map(|(m, s)| m + s).collect();
    GaussianComponent::new(mean, from_dmatrix(&cov))
}

/// Observations of one group, stored row-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Group {
    points: Vec<f64>,
    len: usize,
    labels: Option<Vec<usize>>,
}

impl Group {
    pub fn new(dim: usize, rows: &[Vec<f64>], labels: Option<Vec<usize>>) -> Result<Self, ModelError> {
        let mut points = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(ModelError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            points.extend_from_slice(row);
        }
        if let Some(l) = &labels {
            if l.len() != rows.len() {
                return Err(ModelError::DimensionMismatch {
                    expected: rows.len(),
                    found: l.len(),
                });
            }
        }
        Ok(Self {
            points,
            len: rows.len(),
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True cluster labels, when known (0-based).
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn flat(&self) -> &[f64] {
        &self.points
    }
}

/// Per-group observation matrices aligned with the observed DAG nodes:
/// group `j` belongs to node `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedDataset {
    dim: usize,
    groups: Vec<Group>,
}

impl GroupedDataset {
    pub fn new(dim: usize, groups: Vec<Group>) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::InvalidParameter("dimension is zero".into()));
        }
        for g in &groups {
            if g.points.len() != g.len * dim {
                return Err(ModelError::DimensionMismatch {
                    expected: g.len * dim,
                    found: g.points.len(),
                });
            }
        }
        Ok(Self { dim, groups })
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(dim: usize, groups: Vec<Vec<Vec<f64>>>) -> Result<Self, ModelError> {
        let groups = groups
            .iter()
            .map(|rows| Group::new(dim, rows, None))
            .collect::<Result<_, _>>()?;
        Self::new(dim, groups)
    }

    /// `group_count` empty groups.
    pub fn empty(dim: usize, group_count: usize) -> Self {
        Self {
            dim,
            groups: vec![Group::default(); group_count],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, j: usize) -> &Group {
        &self.groups[j]
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Group::len).collect()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(Group::len).sum()
    }

    pub fn point(&self, j: usize, i: usize) -> &[f64] {
        &self.groups[j].points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self, j: usize) -> impl Iterator<Item = &[f64]> + Clone {
        self.groups[j].points.chunks_exact(self.dim)
    }

    /// All observations, groups concatenated in node order.
    pub fn pooled_points(&self) -> Vec<&[f64]> {
        (0..self.groups.len()).flat_map(|j| self.points(j)).collect()
    }

    /// True labels of every observation in node order, if all groups have them.
    pub fn pooled_labels(&self) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.total());
        for g in &self.groups {
            out.extend_from_slice(g.labels()?);
        }
        Some(out)
    }

    pub fn has_labels(&self) -> bool {
        self.groups.iter().all(|g| g.labels.is_some())
    }

    /// Checks that groups line up with the observed nodes of `ldag`.
    pub fn check_alignment(&self, ldag: &LayeredDag) -> Result<(), ModelError> {
        let observed = ldag.observed_node_count();
        if self.groups.len() != observed {
            return Err(ModelError::ConfigMismatch(format!(
                "dataset has {} groups but the DAG has {} observed nodes",
                self.groups.len(),
                observed
            )));
        }
        if let Some(h) = ldag.hidden_root() {
            if h != observed {
                return Err(ModelError::ConfigMismatch(
                    "hidden root must be the last node".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Concentration parameters, one per DAG node (including any hidden root).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector(Vec<f64>);

impl AlphaVector {
    pub fn new(alpha: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(ModelError::InvalidParameter(format!("alpha = {a}")));
        }
        Ok(Self(alpha))
    }

    pub fn constant(node_count: usize, value: f64) -> Self {
        Self(vec![value; node_count])
    }

    pub fn set(&mut self, node: usize, value: f64) {
        debug_assert!(value > 0.0 && value.is_finite());
        self.0[node] = value;
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for AlphaVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Gamma shape of node `node`'s concentration prior: `alpha0` at the root,
/// otherwise the sum of the parents' concentrations. Reads only parents.
pub fn alpha_prior_shape(ldag: &LayeredDag, alpha0: f64, node: usize, alpha: &[f64]) -> f64 {
    if node == ldag.root() {
        alpha0
    } else {
        ldag.parents(node).iter().map(|&p| alpha[p]).sum()
    }
}

/// Draws every concentration from the gamma-DAG prior in topological order.
pub fn sample_alphas<R: Rng + ?Sized>(ldag: &LayeredDag, alpha0: f64, rng: &mut R) -> AlphaVector {
    let mut alpha = vec![f64::NAN; ldag.node_count()];
    for &j in ldag.topological_order() {
        let shape = alpha_prior_shape(ldag, alpha0, j, &alpha);
        alpha[j] = gamma_draw(shape, rng).max(f64::MIN_POSITIVE);
    }
    AlphaVector(alpha)
}

/// Iteration schedule of one sampler run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcSchedule {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub chains: usize,
}

impl Default for McmcSchedule {
    fn default() -> Self {
        Self {
            iterations: 15_000,
            burn_in: 5_000,
            thin: 1,
            seed: 1,
            chains: 1,
        }
    }
}

impl McmcSchedule {
    /// Number of retained draws.
    pub fn kept(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Metropolis–Hastings proposal settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposalConfig {
    /// Initial standard deviation of simplex steps in log-odds.
    pub simplex_step: f64,
    pub target_acceptance: f64,
    /// Standard deviation of the log-scale random walk on concentrations.
    pub alpha_step: f64,
    /// Sweeps between scale adaptations during burn-in.
    pub adapt_window: usize,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        Self {
            simplex_step: 1.0,
            target_acceptance: 0.3,
            alpha_step: 0.25,
            adapt_window: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdpConfig {
    pub truncation: usize,
    pub alpha0: f64,
    pub niw: NiwParams,
    pub mcmc: McmcSchedule,
    pub proposal: ProposalConfig,
}

impl GdpConfig {
    /// Truncation 10, `α₀ = 5`, `NIW(0, 0.01, I, d)`, 15,000 iterations with
    /// 5,000 burn-in.
    pub fn new(dim: usize) -> Self {
        Self {
            truncation: 10,
            alpha0: 5.0,
            niw: NiwParams::weakly_informative(dim),
            mcmc: McmcSchedule::default(),
            proposal: ProposalConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidParameter(msg));
        if self.truncation < 2 {
            return bad(format!("truncation {} < 2", self.truncation));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return bad(format!("alpha0 = {}", self.alpha0));
        }
        self.niw.validate()?;
        let m = &self.mcmc;
        if m.burn_in >= m.iterations {
            return bad(format!(
                "burn-in {} must be below iterations {}",
                m.burn_in, m.iterations
            ));
        }
        if m.thin == 0 {
            return bad("thinning must be at least 1".into());
        }
        if m.chains == 0 {
            return bad("chain count must be at least 1".into());
        }
        let p = &self.proposal;
        if !(p.target_acceptance > 0.0 && p.target_acceptance < 1.0) {
            return bad(format!("target acceptance {}", p.target_acceptance));
        }
        if !(p.simplex_step > 0.0 && p.simplex_step.is_finite()) {
            return bad(format!("simplex step {}", p.simplex_step));
        }
        if !(p.alpha_step > 0.0 && p.alpha_step.is_finite()) {
            return bad(format!("alpha step {}", p.alpha_step));
        }
        if p.adapt_window == 0 {
            return bad("adaptation window must be at least 1".into());
        }
        Ok(())
    }
}
