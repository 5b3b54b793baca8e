use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Method;
use super::report::Report;
use super::runner::{ChunkRecord, ExperimentResult, SeedRun};
use super::HarnessError;
use crate::dtd::CandidateKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub accuracy: f64,
    pub n_chunks: usize,
    pub alarms: Vec<usize>,
    pub winners: Vec<(usize, CandidateKind)>,
}

/// Contents of `<name>/summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub cell: String,
    pub method: Method,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub seeds: Vec<SeedSummary>,
}

impl ExperimentSummary {
    pub fn of(r: &ExperimentResult) -> Self {
        Self {
            name: r.name.clone(),
            cell: r.cell.clone(),
            method: r.method,
            mean_accuracy: r.mean_accuracy(),
            std_accuracy: r.std_accuracy(),
            seeds: r
                .runs
                .iter()
                .map(|s| SeedSummary {
                    seed: s.seed,
                    accuracy: s.accuracy(),
                    n_chunks: s.records.len(),
                    alarms: s.alarms(),
                    winners: s.winners(),
                })
                .collect(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Output(format!("{}: {e}", path.display()))
}

pub fn write_json(path: &Path, json: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, json).map_err(io_err(path))
}

/// Writes `root/<name>/seed<k>.csv` for every seed and `root/<name>/summary.json`.
pub fn write_result(root: &Path, result: &ExperimentResult) -> Result<PathBuf, HarnessError> {
    let dir = root.join(&result.name);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    for run in &result.runs {
        let path = dir.join(format!("seed{}.csv", run.seed));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        for rec in &run.records {
            w.serialize(rec).map_err(csv_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    let mut json =
        serde_json::to_string_pretty(&ExperimentSummary::of(result)).expect("serializable");
    json.push('\n');
    write_json(&dir.join("summary.json"), &json)?;
    Ok(dir)
}

pub fn write_report(root: &Path, report: &Report) -> Result<PathBuf, HarnessError> {
    let path = root.join("summary.json");
    write_json(&path, &report.to_json())?;
    Ok(path)
}

/// Reads a result directory written by [`write_result`] back from its traces.
pub fn load_result(dir: &Path) -> Result<ExperimentResult, HarnessError> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let summary: ExperimentSummary = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Output(format!("{}: {e}", path.display())))?;
    let mut runs = Vec::with_capacity(summary.seeds.len());
    for s in &summary.seeds {
        let path = dir.join(format!("seed{}.csv", s.seed));
        let mut reader = csv::Reader::from_path(&path).map_err(csv_err(&path))?;
        let mut records = reader
            .deserialize::<ChunkRecord>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(csv_err(&path))?;
        for &(chunk, winner) in &s.winners {
            if let Some(r) = records.iter_mut().find(|r| r.chunk_index == chunk) {
                r.winner = Some(winner);
            }
        }
        runs.push(SeedRun {
            seed: s.seed,
            records,
        });
    }
    Ok(ExperimentResult {
        name: summary.name,
        cell: summary.cell,
        method: summary.method,
        runs,
    })
}

/// Loads every result directory directly below `root`, sorted by name.
pub fn load_results(root: &Path) -> Result<Vec<ExperimentResult>, HarnessError> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(io_err(root))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("summary.json").is_file() && p.is_dir())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| load_result(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::DetectorKind;
    use crate::dtd::TrainingMode;
    use crate::harness::config::ExperimentConfig;
    use crate::harness::runner::run_dtd;
    use crate::stream::{GeneratorKind, StreamConfig};

    #[test]
    fn write_then_load_round_trips() {
        let mut c = ExperimentConfig::new(
            "rt",
            StreamConfig::new(GeneratorKind::Sine).with_size(15, 100),
            DetectorKind::HddmW,
            TrainingMode::Continual,
        );
        c.seeds = vec![0, 5];
        c.detector.threshold = Some(0.2);
        let r = run_dtd(&c).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let dir = write_result(tmp.path(), &r).unwrap();
        assert!(dir.join("seed5.csv").is_file());
        let header = fs::read_to_string(dir.join("seed0.csv")).unwrap();
        assert!(header.starts_with("chunk_index,accuracy,statistic,threshold,alarm,phase\n"));
        let back = load_result(&dir).unwrap();
        assert_eq!(back.name, r.name);
        for (a, b) in back.runs.iter().zip(&r.runs) {
            assert_eq!(a.accuracy(), b.accuracy());
            assert_eq!(a.alarms(), b.alarms());
            assert_eq!(a.thresholds(), b.thresholds());
            assert_eq!(a.winners(), b.winners());
        }
        assert_eq!(load_results(tmp.path()).unwrap().len(), 1);
    }
}
