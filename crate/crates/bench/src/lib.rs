//! Experiment driver for graphical Dirichlet process clustering: config
//! resolution, dataset and chain files, replicated method comparisons and
//! SVG figures. The `gdp` binary is a thin command-line layer over
//! [`commands`].

pub mod chains;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod plot;

/// Builds the worker pool, sized by `GDP_WORKERS` when it is set to a
/// positive integer.
pub fn worker_pool() -> Result<rayon::ThreadPool, error::BenchError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("GDP_WORKERS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| error::BenchError::Config(format!("GDP_WORKERS={v:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| error::BenchError::Config(e.to_string()))
}
