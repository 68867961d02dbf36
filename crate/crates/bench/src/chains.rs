//! Chain files: one JSON header line followed by one sample record per line.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use gdp_core::gibbs::{AcceptanceReport, ChainSamples, SampleRecord};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const CHAIN_FORMAT: &str = "gdp-chain";
pub const CHAIN_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainHeader {
    pub format: String,
    pub version: u32,
    pub chain: usize,
    pub seed: u64,
    pub mode: String,
    pub truncation: usize,
    pub group_sizes: Vec<usize>,
    pub dim: usize,
    /// Dataset directory the chain was fitted to.
    pub dataset: Option<PathBuf>,
    pub acceptance: AcceptanceReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainFile {
    pub header: ChainHeader,
    pub records: Vec<SampleRecord>,
}

impl ChainFile {
    pub fn loglik_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loglik).collect()
    }
}

pub fn chain_file_name(chain: usize) -> String {
    format!("chain_{}.ndjson", chain + 1)
}

pub fn write_chain(path: &Path, header: &ChainHeader, samples: &ChainSamples) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut lines = vec![serde_json::to_string(header)];
    lines.extend(samples.records.iter().map(serde_json::to_string));
    for line in lines {
        let text = line.map_err(|e| BenchError::io(path, e))?;
        writeln!(w, "{text}").map_err(|e| BenchError::io(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_chain(path: &Path) -> Result<ChainFile> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let schema = |msg: String| BenchError::SchemaMismatch(format!("{}: {msg}", path.display()));
    let first = lines
        .next()
        .ok_or_else(|| schema("empty chain file".into()))?
        .map_err(|e| BenchError::io(path, e))?;
    let header: ChainHeader = serde_json::from_str(&first).map_err(|e| schema(e.to_string()))?;
    if header.format != CHAIN_FORMAT || header.version != CHAIN_VERSION {
        return Err(schema(format!(
            "expected {CHAIN_FORMAT} version {CHAIN_VERSION}, found {} version {}",
            header.format, header.version
        )));
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line.map_err(|e| BenchError::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let r: SampleRecord = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        if r.labels.iter().map(Vec::len).collect::<Vec<_>>() != header.group_sizes {
            return Err(schema(format!("record {} does not match the group sizes", r.iteration)));
        }
        records.push(r);
    }
    Ok(ChainFile { header, records })
}

/// Chain files in `dir`, ordered by chain number.
pub fn chain_files_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found: Vec<(usize, PathBuf)> = std::fs::read_dir(dir)
        .map_err(|e| BenchError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter_map(|p| {
            let name = p.file_name()?.to_str()?;
            let n = name.strip_prefix("chain_")?.strip_suffix(".ndjson")?.parse().ok()?;
            Some((n, p))
        })
        .collect();
    found.sort();
    Ok(found.into_iter().map(|(_, p)| p).collect())
}
