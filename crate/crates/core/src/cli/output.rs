//! CSV writers.
//!
//! Trajectory columns: `t, agent, xI_1..xI_n, xP_1..xP_n, theta, V, phi_norm`,
//! one row per recorded sample and agent. Edge columns:
//! `t, i, j, theta_error`. Agents are numbered from 1. Numbers are written
//! with Rust's shortest round-trip formatting.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::sim::TrajectoryRecord;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("trajectory record has no samples")]
    EmptyRecord,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "agent".to_string()];
    cols.extend((1..=n).map(|i| format!("xI_{i}")));
    cols.extend((1..=n).map(|i| format!("xP_{i}")));
    cols.extend(["theta", "V", "phi_norm"].map(String::from));
    cols
}

pub const EDGE_HEADER: [&str; 4] = ["t", "i", "j", "theta_error"];

/// `<dir>/<stem>_edges.csv` next to the trajectory file.
pub fn edges_path(trajectory: &Path) -> PathBuf {
    let stem = trajectory.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    trajectory.with_file_name(format!("{stem}_edges.csv"))
}

fn create_parent(path: &Path) -> Result<(), OutputError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(io_err(dir)),
        _ => Ok(()),
    }
}

/// Writes the trajectory CSV and its companion edge CSV; returns both paths.
pub fn write_trajectory_csv(record: &TrajectoryRecord<f64>, path: &Path) -> Result<(PathBuf, PathBuf), OutputError> {
    if record.samples.is_empty() {
        return Err(OutputError::EmptyRecord);
    }
    create_parent(path)?;
    let n = record.header.dim;
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(trajectory_header(n)).map_err(csv_err(path))?;
    for s in &record.samples {
        for (i, a) in s.agents.iter().enumerate() {
            let mut row = vec![s.t.to_string(), (i + 1).to_string()];
            row.extend(a.x_i.iter().map(f64::to_string));
            row.extend(a.x_p.iter().map(f64::to_string));
            row.extend([a.theta, a.v, a.phi_norm].map(|v| v.to_string()));
            w.write_record(&row).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))?;

    let epath = edges_path(path);
    let mut w = csv::Writer::from_path(&epath).map_err(csv_err(&epath))?;
    w.write_record(EDGE_HEADER).map_err(csv_err(&epath))?;
    for s in &record.samples {
        for (&(i, j), e) in record.header.edges.iter().zip(&s.edge_errors) {
            w.write_record([s.t.to_string(), (i + 1).to_string(), (j + 1).to_string(), e.to_string()])
                .map_err(csv_err(&epath))?;
        }
    }
    w.flush().map_err(io_err(&epath))?;
    Ok((path.to_path_buf(), epath))
}
