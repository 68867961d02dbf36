//! CSV persistence of grouped datasets and partitions.
//!
//! A dataset directory holds `groups.csv` (columns `file,node,labels`, with
//! one-based node ids), one `group_<node>.csv` per group with columns
//! `x1..xd`, and optionally `labels_<node>.csv` with a one-based `label`
//! column.

use std::path::Path;

use gdp_core::model::{Group, GroupedDataset};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct GroupRow {
    file: String,
    node: usize,
    labels: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    label: usize,
}

/// One row of a partition file; group and label are one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub group: usize,
    pub index: usize,
    pub label: usize,
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| BenchError::io(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).map_err(|e| BenchError::io(path, e))
}

fn flush(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| BenchError::io(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| BenchError::SchemaMismatch(format!("{}: {e}", path.display())))
}

pub fn write_dataset(dir: &Path, data: &GroupedDataset) -> Result<()> {
    create_dir(dir)?;
    let index_path = dir.join("groups.csv");
    let mut index = writer(&index_path)?;
    for (j, group) in data.groups().iter().enumerate() {
        let node = j + 1;
        let file = format!("group_{node}.csv");
        let path = dir.join(&file);
        let mut w = writer(&path)?;
        let header: Vec<String> = (1..=data.dim()).map(|d| format!("x{d}")).collect();
        w.write_record(&header).map_err(|e| BenchError::io(&path, e))?;
        for x in data.points(j) {
            w.write_record(x.iter().map(|v| format!("{v:?}"))).map_err(|e| BenchError::io(&path, e))?;
        }
        flush(w, &path)?;
        let labels = match group.labels() {
            Some(l) => {
                let name = format!("labels_{node}.csv");
                let path = dir.join(&name);
                let mut w = writer(&path)?;
                for &z in l {
                    w.serialize(LabelRow { label: z + 1 }).map_err(|e| BenchError::io(&path, e))?;
                }
                flush(w, &path)?;
                name
            }
            None => String::new(),
        };
        index
            .serialize(GroupRow { file, node, labels })
            .map_err(|e| BenchError::io(&index_path, e))?;
    }
    flush(index, &index_path)
}

pub fn read_dataset(dir: &Path) -> Result<GroupedDataset> {
    let index_path = dir.join("groups.csv");
    let mut rows: Vec<GroupRow> = reader(&index_path)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| BenchError::SchemaMismatch(format!("{}: {e}", index_path.display())))?;
    rows.sort_by_key(|r| r.node);
    for (j, r) in rows.iter().enumerate() {
        if r.node != j + 1 {
            return Err(BenchError::SchemaMismatch(format!(
                "groups.csv must list nodes 1..{} once each",
                rows.len()
            )));
        }
    }
    let mut dim = None;
    let mut groups = Vec::with_capacity(rows.len());
    for r in &rows {
        let path = dir.join(&r.file);
        let mut rd = reader(&path)?;
        let width = rd.headers().map_err(|e| BenchError::io(&path, e))?.len();
        if *dim.get_or_insert(width) != width {
            return Err(BenchError::SchemaMismatch(format!("{} has {width} columns", path.display())));
        }
        let mut points = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| BenchError::SchemaMismatch(format!("{}: {e}", path.display())))?;
            let x = rec
                .iter()
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| BenchError::SchemaMismatch(format!("{}: {e}", path.display())))?;
            points.push(x);
        }
        let labels = if r.labels.is_empty() {
            None
        } else {
            let path = dir.join(&r.labels);
            let l: Vec<LabelRow> = reader(&path)?
                .deserialize()
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| BenchError::SchemaMismatch(format!("{}: {e}", path.display())))?;
            if l.iter().any(|x| x.label == 0) {
                return Err(BenchError::SchemaMismatch(format!("{}: labels are one-based", path.display())));
            }
            Some(l.into_iter().map(|x| x.label - 1).collect())
        };
        groups.push(Group::new(width, &points, labels)?);
    }
    Ok(GroupedDataset::new(dim.unwrap_or(0), groups)?)
}

/// Writes zero-based per-group labels as one-based rows.
pub fn write_partition(path: &Path, labels: &[Vec<usize>]) -> Result<()> {
    let mut w = writer(path)?;
    for (j, group) in labels.iter().enumerate() {
        for (i, &z) in group.iter().enumerate() {
            w.serialize(PartitionRow {
                group: j + 1,
                index: i + 1,
                label: z + 1,
            })
            .map_err(|e| BenchError::io(path, e))?;
        }
    }
    flush(w, path)
}

/// Reads a partition file back into zero-based per-group labels.
pub fn read_partition(path: &Path) -> Result<Vec<Vec<usize>>> {
    let rows: Vec<PartitionRow> = reader(path)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| BenchError::SchemaMismatch(format!("{}: {e}", path.display())))?;
    let mut out: Vec<Vec<usize>> = Vec::new();
    for r in rows {
        if r.group == 0 || r.label == 0 {
            return Err(BenchError::SchemaMismatch("partition ids are one-based".into()));
        }
        if out.len() < r.group {
            out.resize(r.group, Vec::new());
        }
        if r.index != out[r.group - 1].len() + 1 {
            return Err(BenchError::SchemaMismatch(format!("group {} rows out of order", r.group)));
        }
        out[r.group - 1].push(r.label - 1);
    }
    Ok(out)
}

/// Writes a square matrix as CSV without a header.
pub fn write_matrix(path: &Path, size: usize, row: impl Fn(usize) -> Vec<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| BenchError::io(path, e))?;
    for a in 0..size {
        w.write_record(row(a).iter().map(|v| format!("{v}"))).map_err(|e| BenchError::io(path, e))?;
    }
    flush(w, path)
}
