//! Brute-force reference implementations of the clustering indices.

#![allow(dead_code)]

use rand::Rng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn cluster_ids(labels: &[usize]) -> Vec<usize> {
    let mut ids: Vec<usize> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// ARI from the pair-counting definition over all `C(N, 2)` pairs.
pub fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b, mut total) = (0i128, 0i128, 0i128, 0i128);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            both += i128::from(sa && sb);
            in_a += i128::from(sa);
            in_b += i128::from(sb);
            total += 1;
        }
    }
    // (both − in_a·in_b/total) / ((in_a + in_b)/2 − in_a·in_b/total), cleared of fractions.
    let num = 2 * (both * total - in_a * in_b);
    let den = (in_a + in_b) * total - 2 * in_a * in_b;
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Calinski–Harabasz with dispersions from pairwise squared distances.
pub fn chi_pairwise(x: &[Vec<f64>], labels: &[usize]) -> f64 {
    let sq = |i: usize, j: usize| dist(&x[i], &x[j]).powi(2);
    let n = x.len();
    let ids = cluster_ids(labels);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += sq(i, j);
        }
    }
    total /= 2.0 * n as f64;
    let mut within = 0.0;
    for &c in &ids {
        let m: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let mut s = 0.0;
        for &i in &m {
            for &j in &m {
                s += sq(i, j);
            }
        }
        within += s / (2.0 * m.len() as f64);
    }
    let k = ids.len() as f64;
    (total - within) / (k - 1.0) / (within / (n as f64 - k))
}

fn centroid(x: &[Vec<f64>], labels: &[usize], c: usize) -> Vec<f64> {
    let members: Vec<&Vec<f64>> = x.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
    (0..x[0].len())
        .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64)
        .collect()
}

pub fn dbi_direct(x: &[Vec<f64>], labels: &[usize]) -> f64 {
    let ids = cluster_ids(labels);
    let cents: Vec<Vec<f64>> = ids.iter().map(|&c| centroid(x, labels, c)).collect();
    let spread: Vec<f64> = ids
        .iter()
        .zip(&cents)
        .map(|(&c, m)| {
            let d: Vec<f64> = x.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| dist(p, m)).collect();
            d.iter().sum::<f64>() / d.len() as f64
        })
        .collect();
    let k = ids.len();
    (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (spread[i] + spread[j]) / dist(&cents[i], &cents[j]))
                .fold(f64::MIN, f64::max)
        })
        .sum::<f64>()
        / k as f64
}

pub fn silhouette_direct(x: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = x.len();
    let ids = cluster_ids(labels);
    let mut total = 0.0;
    for i in 0..n {
        let mean_to = |c: usize| {
            let d: Vec<f64> = (0..n).filter(|&j| j != i && labels[j] == c).map(|j| dist(&x[i], &x[j])).collect();
            (d.iter().sum::<f64>() / d.len() as f64, d.len())
        };
        let (a, own) = mean_to(labels[i]);
        if own == 0 {
            continue;
        }
        let b = ids
            .iter()
            .filter(|&&c| c != labels[i])
            .map(|&c| mean_to(c).0)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

/// Random 2-D points with labels covering at least two clusters.
pub fn random_fixture<R: Rng>(rng: &mut R, max_n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    loop {
        let n = rng.random_range(4..=max_n);
        let k = rng.random_range(2..=5usize.min(n - 1));
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let x: Vec<Vec<f64>> = labels
            .iter()
            .map(|&c| vec![c as f64 * 2.0 + rng.random::<f64>() * 3.0, rng.random::<f64>() * 4.0 - 2.0])
            .collect();
        let distinct = cluster_ids(&labels).len();
        if distinct >= 2 && distinct < n {
            return (x, labels);
        }
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
