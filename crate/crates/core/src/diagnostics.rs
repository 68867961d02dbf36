//! Monte Carlo error estimates for autocorrelated traces.

/// Batch-means standard error of the mean of `trace`, using
/// `⌊√n⌋` batches of equal size (trailing draws dropped).
pub fn batch_means_se(trace: &[f64]) -> f64 {
    let n = trace.len();
    let batches = ((n as f64).sqrt().floor() as usize).max(2);
    let size = n / batches;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = trace
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Effective sample size implied by the batch-means variance.
pub fn effective_sample_size(trace: &[f64]) -> f64 {
    let n = trace.len() as f64;
    let mean = trace.iter().sum::<f64>() / n;
    let var = trace.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = batch_means_se(trace);
    if se == 0.0 { n } else { (var / (se * se)).min(n) }
}
