//! Prequential experiment runner comparing fixed-threshold baselines with DTD.

mod config;
mod output;
mod report;
mod runner;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    default_seeds, ClassifierConfig, DetectorConfig, ExperimentConfig, Method, MethodSelection,
};
pub use output::{
    load_result, load_results, write_json, write_report, write_result, ExperimentSummary,
    SeedSummary,
};
pub use report::{summarize, CellReport, MethodStats, PairedCounts, Report};
pub use runner::{
    detector_for, prequential, prequential_dtd, run_baseline, run_config, run_dtd, run_experiment,
    run_seed, run_suite, stream_for, synthetic_grid, ChunkRecord, ExperimentResult, SeedRun,
};

use crate::classifier::EvalError;
use crate::dtd::DtdError;
use crate::stream::StreamError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(StreamError),
    #[error(transparent)]
    Dtd(#[from] DtdError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("report error: {0}")]
    Report(String),
    #[error("output error: {0}")]
    Output(String),
}

impl From<StreamError> for HarnessError {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::Config(m) => HarnessError::Config(m),
            other => HarnessError::Stream(other),
        }
    }
}

impl From<crate::classifier::ModelError> for HarnessError {
    fn from(e: crate::classifier::ModelError) -> Self {
        HarnessError::Eval(EvalError::Model(e))
    }
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    /// Replace the seed list with `0..n`.
    pub seeds: Option<usize>,
    pub method: Option<Method>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(n) = self.seeds {
            config.seeds = (0..n as u64).collect();
        }
        if let Some(m) = self.method {
            config.method = m.into();
        }
    }
}

/// Loads every `*.toml` file in `dir`, sorted by file name.
pub fn load_suite(dir: &Path) -> Result<Vec<ExperimentConfig>, HarnessError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(HarnessError::Config(format!(
            "no .toml configs in {}",
            dir.display()
        )));
    }
    let configs = paths
        .iter()
        .map(|p| ExperimentConfig::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut names: Vec<&str> = configs.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(HarnessError::Config(format!(
            "duplicate experiment name `{}`",
            w[0]
        )));
    }
    Ok(configs)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, HarnessError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
