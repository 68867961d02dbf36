//! Posterior partition summaries and clustering evaluation.
//!
//! Partitions are plain label slices; only equality of labels matters, so
//! every index here is invariant to relabeling.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::categorical;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no samples")]
    EmptySamples,
    #[error("partitions have lengths {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate clustering: {0}")]
    DegenerateClustering(String),
    #[error("k = {k} exceeds the {n} observations")]
    KTooLarge { k: usize, n: usize },
    #[error("observation {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
}

/// Pairwise posterior same-cluster frequencies over all observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoclusteringMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl CoclusteringMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.size + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.entries[a * self.size..(a + 1) * self.size]
    }
}

/// Fraction of samples in which each pair of observations shares a label.
pub fn coclustering<T, S>(samples: &[S]) -> Result<CoclusteringMatrix, MetricsError>
where
    T: PartialEq + Sync,
    S: AsRef<[T]> + Sync,
{
    let first = samples.first().ok_or(MetricsError::EmptySamples)?.as_ref().len();
    for s in samples {
        check_lengths(first, s.as_ref().len())?;
    }
    let count = samples.len() as f64;
    let entries: Vec<f64> = (0..first)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut row = vec![0usize; first];
            for s in samples {
                let s = s.as_ref();
                for (b, r) in row.iter_mut().enumerate() {
                    if s[a] == s[b] {
                        *r += 1;
                    }
                }
            }
            row.into_iter().map(move |c| c as f64 / count)
        })
        .collect();
    Ok(CoclusteringMatrix { size: first, entries })
}

/// `Σ_{a,b} (𝟙[z_a = z_b] − π_ab)²` over all ordered pairs.
pub fn dahl_loss<T: PartialEq>(labels: &[T], matrix: &CoclusteringMatrix) -> f64 {
    let mut loss = 0.0;
    for a in 0..labels.len() {
        let row = matrix.row(a);
        for b in 0..labels.len() {
            let same = if labels[a] == labels[b] { 1.0 } else { 0.0 };
            loss += (same - row[b]).powi(2);
        }
    }
    loss
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DahlEstimate {
    /// Position of the chosen sample in the input.
    pub index: usize,
    pub loss: f64,
}

/// The sampled partition with the smallest least-squares loss against
/// `matrix`; the earliest sample wins ties.
pub fn dahl_point_estimate<T, S>(samples: &[S], matrix: &CoclusteringMatrix) -> Result<DahlEstimate, MetricsError>
where
    T: PartialEq + Sync,
    S: AsRef<[T]> + Sync,
{
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    for s in samples {
        check_lengths(matrix.size(), s.as_ref().len())?;
    }
    let losses: Vec<f64> = samples.par_iter().map(|s| dahl_loss(s.as_ref(), matrix)).collect();
    let mut best = DahlEstimate { index: 0, loss: losses[0] };
    for (index, &loss) in losses.iter().enumerate().skip(1) {
        if loss < best.loss {
            best = DahlEstimate { index, loss };
        }
    }
    Ok(best)
}

fn check_lengths(left: usize, right: usize) -> Result<(), MetricsError> {
    if left == right {
        Ok(())
    } else {
        Err(MetricsError::LengthMismatch { left, right })
    }
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Maps arbitrary labels to `0..k` in order of first appearance.
pub fn dense_labels<T: Eq + Hash + Copy>(labels: &[T]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let dense = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect();
    (dense, ids.len())
}

/// Adjusted Rand index from the contingency table. Two partitions without
/// any informative pair structure (fewer than two points, or both trivial)
/// score 1.
pub fn adjusted_rand_index<A, B>(a: &[A], b: &[B]) -> Result<f64, MetricsError>
where
    A: Eq + Hash + Copy,
    B: Eq + Hash + Copy,
{
    check_lengths(a.len(), b.len())?;
    let (da, ka) = dense_labels(a);
    let (db, kb) = dense_labels(b);
    let mut table = vec![0u64; ka * kb];
    for (&x, &y) in da.iter().zip(&db) {
        table[x * kb + y] += 1;
    }
    let mut rows = vec![0u64; ka];
    let mut cols = vec![0u64; kb];
    for x in 0..ka {
        for y in 0..kb {
            rows[x] += table[x * kb + y];
            cols[y] += table[x * kb + y];
        }
    }
    let both: u64 = table.iter().map(|&n| choose2(n)).sum();
    let in_a: u64 = rows.iter().map(|&n| choose2(n)).sum();
    let in_b: u64 = cols.iter().map(|&n| choose2(n)).sum();
    Ok(ari_from_pair_counts(both, in_a, in_b, choose2(a.len() as u64)))
}

/// ARI from the number of pairs joined in both partitions, in each one, and
/// in total. Evaluated as one ratio of exact integers, so the result is
/// correctly rounded.
pub fn ari_from_pair_counts(both: u64, in_a: u64, in_b: u64, pairs: u64) -> f64 {
    let (both, in_a, in_b, pairs) = (both as i128, in_a as i128, in_b as i128, pairs as i128);
    let num = 2 * (both * pairs - in_a * in_b);
    let den = (in_a + in_b) * pairs - 2 * in_a * in_b;
    if den == 0 {
        return 1.0;
    }
    num as f64 / den as f64
}

struct Clusters {
    members: Vec<Vec<usize>>,
    centroids: Vec<Vec<f64>>,
    centre: Vec<f64>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn mean_of<P: AsRef<[f64]>>(data: &[P], idx: impl Iterator<Item = usize>, dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim];
    let mut n = 0usize;
    for i in idx {
        for (a, x) in m.iter_mut().zip(data[i].as_ref()) {
            *a += x;
        }
        n += 1;
    }
    m.iter_mut().for_each(|a| *a /= n as f64);
    m
}

fn check_dims<P: AsRef<[f64]>>(data: &[P]) -> Result<usize, MetricsError> {
    let dim = data.first().map_or(0, |p| p.as_ref().len());
    for (index, p) in data.iter().enumerate() {
        if p.as_ref().len() != dim {
            return Err(MetricsError::DimensionMismatch { index, expected: dim, found: p.as_ref().len() });
        }
    }
    Ok(dim)
}

fn clusters<P, T>(data: &[P], labels: &[T], what: &str) -> Result<Clusters, MetricsError>
where
    P: AsRef<[f64]>,
    T: Eq + Hash + Copy,
{
    check_lengths(data.len(), labels.len())?;
    let dim = check_dims(data)?;
    let (dense, k) = dense_labels(labels);
    if k < 2 {
        return Err(MetricsError::DegenerateClustering(format!("{what} needs at least two clusters")));
    }
    let mut members = vec![Vec::new(); k];
    for (i, &c) in dense.iter().enumerate() {
        members[c].push(i);
    }
    let centroids = members.iter().map(|m| mean_of(data, m.iter().copied(), dim)).collect();
    Ok(Clusters {
        members,
        centroids,
        centre: mean_of(data, 0..data.len(), dim),
    })
}

/// Calinski–Harabasz index: between- over within-cluster dispersion, each
/// scaled by its degrees of freedom. A clustering with zero within-cluster
/// dispersion scores 1.
pub fn calinski_harabasz<P, T>(data: &[P], labels: &[T]) -> Result<f64, MetricsError>
where
    P: AsRef<[f64]>,
    T: Eq + Hash + Copy,
{
    let c = clusters(data, labels, "Calinski-Harabasz")?;
    let (n, k) = (data.len(), c.members.len());
    if k >= n {
        return Err(MetricsError::DegenerateClustering("Calinski-Harabasz needs k < N".into()));
    }
    let mut between = 0.0;
    let mut within = 0.0;
    for (m, centroid) in c.members.iter().zip(&c.centroids) {
        between += m.len() as f64 * squared_distance(centroid, &c.centre);
        within += m.iter().map(|&i| squared_distance(data[i].as_ref(), centroid)).sum::<f64>();
    }
    if within == 0.0 {
        return Ok(1.0);
    }
    Ok(between * (n - k) as f64 / (within * (k - 1) as f64))
}

/// Davies–Bouldin index: mean over clusters of the worst ratio of summed
/// scatter to centroid separation.
pub fn davies_bouldin<P, T>(data: &[P], labels: &[T]) -> Result<f64, MetricsError>
where
    P: AsRef<[f64]>,
    T: Eq + Hash + Copy,
{
    let c = clusters(data, labels, "Davies-Bouldin")?;
    let k = c.members.len();
    let scatter: Vec<f64> = c
        .members
        .iter()
        .zip(&c.centroids)
        .map(|(m, centroid)| m.iter().map(|&i| euclidean(data[i].as_ref(), centroid)).sum::<f64>() / m.len() as f64)
        .collect();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = euclidean(&c.centroids[i], &c.centroids[j]);
            if d == 0.0 {
                return Err(MetricsError::DegenerateClustering("two clusters share a centroid".into()));
            }
            worst = worst.max((scatter[i] + scatter[j]) / d);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// Mean silhouette width with Euclidean distance; members of singleton
/// clusters contribute 0.
pub fn silhouette<P, T>(data: &[P], labels: &[T]) -> Result<f64, MetricsError>
where
    P: AsRef<[f64]> + Sync,
    T: Eq + Hash + Copy,
{
    let c = clusters(data, labels, "silhouette")?;
    let (dense, k) = dense_labels(labels);
    let sizes: Vec<usize> = c.members.iter().map(Vec::len).collect();
    let widths: Vec<f64> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let own = dense[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, p) in data.iter().enumerate() {
                if j != i {
                    sums[dense[j]] += euclidean(data[i].as_ref(), p.as_ref());
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&q| q != own)
                .map(|q| sums[q] / sizes[q] as f64)
                .fold(f64::INFINITY, f64::min);
            let top = a.max(b);
            if top == 0.0 { 0.0 } else { (b - a) / top }
        })
        .collect();
    Ok(widths.iter().sum::<f64>() / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares after seeding and after every update.
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centroids.iter().enumerate() {
        let d = squared_distance(x, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds<P: AsRef<[f64]>, R: Rng + ?Sized>(data: &[P], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centroids = vec![data[rng.random_range(0..n)].as_ref().to_vec()];
    let mut d2: Vec<f64> = data.iter().map(|x| squared_distance(x.as_ref(), &centroids[0])).collect();
    while centroids.len() < k {
        let next = if d2.iter().sum::<f64>() > 0.0 {
            categorical(&d2, rng)
        } else {
            rng.random_range(0..n)
        };
        let c = data[next].as_ref().to_vec();
        for (d, x) in d2.iter_mut().zip(data) {
            *d = d.min(squared_distance(x.as_ref(), &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd's algorithm from k-means++ seeds. Stops when no assignment changes
/// or after `max_iters` updates; a cluster that loses all its points keeps
/// its previous centroid.
pub fn kmeans<P, R>(data: &[P], k: usize, max_iters: usize, rng: &mut R) -> Result<KMeansResult, MetricsError>
where
    P: AsRef<[f64]>,
    R: Rng + ?Sized,
{
    let n = data.len();
    if k == 0 || k > n {
        return Err(MetricsError::KTooLarge { k, n });
    }
    let dim = check_dims(data)?;
    let mut centroids = plus_plus_seeds(data, k, rng);
    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, f64) {
        let mut sse = 0.0;
        let labels = data
            .iter()
            .map(|x| {
                let (c, d) = nearest(x.as_ref(), centroids);
                sse += d;
                c
            })
            .collect();
        (labels, sse)
    };
    let (mut labels, sse) = assign(&centroids);
    let mut sse_trace = vec![sse];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members = labels.iter().enumerate().filter(|(_, &l)| l == c).map(|(i, _)| i);
            if labels.contains(&c) {
                *centroid = mean_of(data, members, dim);
            }
        }
        let (next, sse) = assign(&centroids);
        sse_trace.push(sse);
        let changed = next != labels;
        labels = next;
        if !changed {
            break;
        }
    }
    Ok(KMeansResult {
        labels,
        centroids,
        sse_trace,
        iterations,
    })
}

/// External and internal validation of one estimated partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub method: String,
    pub seed: u64,
    /// ARI against the truth for each group, when truth is known.
    pub group_ari: Option<Vec<f64>>,
    pub pooled_ari: Option<f64>,
    /// Internal indices on the pooled data; `None` when the estimate is
    /// degenerate for that index.
    pub chi: Option<f64>,
    pub dbi: Option<f64>,
    pub si: Option<f64>,
    pub clusters: usize,
    /// Wall-clock time of the fit, when recorded.
    pub runtime_seconds: Option<f64>,
}

/// Scores an estimated partition, given per group, against optional
/// per-group truth. Internal indices use the pooled observations.
pub fn evaluate<P>(
    method: &str,
    seed: u64,
    groups: &[Vec<P>],
    estimate: &[Vec<usize>],
    truth: Option<&[Vec<usize>]>,
    runtime_seconds: Option<f64>,
) -> Result<MetricReport, MetricsError>
where
    P: AsRef<[f64]> + Sync,
{
    check_lengths(groups.len(), estimate.len())?;
    let pooled_points: Vec<&[f64]> = groups.iter().flatten().map(|p| p.as_ref()).collect();
    let flat: Vec<usize> = estimate.iter().flatten().copied().collect();
    check_lengths(pooled_points.len(), flat.len())?;
    let (group_ari, pooled_ari) = match truth {
        Some(t) => {
            check_lengths(groups.len(), t.len())?;
            let per = estimate
                .iter()
                .zip(t)
                .map(|(e, t)| adjusted_rand_index(e, t))
                .collect::<Result<Vec<_>, _>>()?;
            let t_flat: Vec<usize> = t.iter().flatten().copied().collect();
            (Some(per), Some(adjusted_rand_index(&flat, &t_flat)?))
        }
        None => (None, None),
    };
    Ok(MetricReport {
        method: method.to_string(),
        seed,
        group_ari,
        pooled_ari,
        chi: calinski_harabasz(&pooled_points, &flat).ok(),
        dbi: davies_bouldin(&pooled_points, &flat).ok(),
        si: silhouette(&pooled_points, &flat).ok(),
        clusters: dense_labels(&flat).1,
        runtime_seconds,
    })
}
