//! Chunked labeled streams: synthetic drifting generators and CSV ingestion.
//!
//! Every built-in generator draws chunk `c` from its own ChaCha8 sub-stream
//! (`seed_from_u64(seed)` then `set_stream(c)`), so the content of a chunk
//! depends only on `(seed, c)` and never on the order chunks are produced.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("invalid stream configuration: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Ingest {
        path: PathBuf,
        line: u64,
        message: String,
    },
}

/// One labeled example.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<F> {
    pub features: Vec<F>,
    pub label: usize,
}

/// A batch of instances observed at one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct Chunk<F> {
    pub index: usize,
    pub instances: Vec<Instance<F>>,
}

impl<F> Chunk<F> {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Feature dimension of the first instance.
    pub fn n_features(&self) -> Option<usize> {
        self.instances.first().map(|i| i.features.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Sea,
    Sine,
    Mixed,
    Csv,
}

/// Default SEA concept thresholds, cycled in this order.
pub const SEA_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

fn default_n_chunks() -> usize {
    100
}
fn default_chunk_size() -> usize {
    1000
}
fn default_drift_period() -> usize {
    10
}
fn default_sea_thresholds() -> Vec<f64> {
    SEA_THRESHOLDS.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamConfig {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n_chunks")]
    pub n_chunks: usize,
    #[serde(default = "default_chunk_size")]
    pub chunk_size: usize,
    /// Chunks per concept before the next abrupt drift.
    #[serde(default = "default_drift_period")]
    pub drift_period: usize,
    /// Label-flip probability (SEA only).
    #[serde(default)]
    pub noise: f64,
    /// SEA concept thresholds on `f1 + f2`.
    #[serde(default = "default_sea_thresholds")]
    pub sea_thresholds: Vec<f64>,
    /// Explicit concept index per chunk; overrides the periodic drift
    /// schedule when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    /// CSV source file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Skip the first CSV row.
    #[serde(default)]
    pub header: bool,
}

impl StreamConfig {
    pub fn new(kind: GeneratorKind) -> Self {
        Self {
            kind,
            seed: 0,
            n_chunks: default_n_chunks(),
            chunk_size: default_chunk_size(),
            drift_period: default_drift_period(),
            noise: 0.0,
            sea_thresholds: default_sea_thresholds(),
            schedule: None,
            path: None,
            header: false,
        }
    }

    pub fn sea(noise: f64) -> Self {
        Self {
            noise,
            ..Self::new(GeneratorKind::Sea)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_size(mut self, n_chunks: usize, chunk_size: usize) -> Self {
        self.n_chunks = n_chunks;
        self.chunk_size = chunk_size;
        self
    }

    pub fn with_drift_period(mut self, drift_period: usize) -> Self {
        self.drift_period = drift_period;
        self
    }

    pub fn with_sea_thresholds(mut self, thresholds: Vec<f64>) -> Self {
        self.sea_thresholds = thresholds;
        self
    }

    pub fn with_schedule(mut self, schedule: Vec<usize>) -> Self {
        self.schedule = Some(schedule);
        self
    }

    /// Number of distinct concepts the generator cycles through.
    pub fn n_concepts(&self) -> usize {
        match self.kind {
            GeneratorKind::Sea => self.sea_thresholds.len(),
            GeneratorKind::Sine | GeneratorKind::Mixed => 2,
            GeneratorKind::Csv => 1,
        }
    }

    /// Concept active during chunk `chunk`.
    pub fn concept_at(&self, chunk: usize) -> usize {
        match &self.schedule {
            Some(s) => s[chunk],
            None => (chunk / self.drift_period) % self.n_concepts(),
        }
    }

    pub fn validate(&self) -> Result<(), StreamError> {
        let err = |m: &str| Err(StreamError::Config(m.to_string()));
        if self.chunk_size == 0 {
            return err("chunk_size must be positive");
        }
        if self.kind == GeneratorKind::Csv {
            if self.path.is_none() {
                return err("csv stream requires `path`");
            }
            return Ok(());
        }
        if self.n_chunks == 0 {
            return err("n_chunks must be positive");
        }
        if self.drift_period == 0 {
            return err("drift_period must be positive");
        }
        if !(0.0..=0.5).contains(&self.noise) {
            return err("noise must lie in [0, 0.5]");
        }
        if self.kind == GeneratorKind::Sea
            && (self.sea_thresholds.is_empty()
                || self.sea_thresholds.iter().any(|t| !t.is_finite()))
        {
            return err("sea_thresholds must be a non-empty list of finite values");
        }
        if let Some(s) = &self.schedule {
            if s.len() < self.n_chunks {
                return err("schedule must name a concept for every chunk");
            }
            if s.iter().any(|&c| c >= self.n_concepts()) {
                return err("schedule references an unknown concept");
            }
        }
        Ok(())
    }
}

/// An ordered, immutable sequence of chunks.
#[derive(Clone, Debug, PartialEq)]
pub struct Stream<F> {
    pub chunks: Vec<Chunk<F>>,
    pub n_features: usize,
}

impl<F: Scalar> Stream<F> {
    /// Builds the stream described by `config`.
    pub fn generate(config: &StreamConfig) -> Result<Self, StreamError> {
        match config.kind {
            GeneratorKind::Sea => gen_sea(config),
            GeneratorKind::Sine => gen_sine(config),
            GeneratorKind::Mixed => gen_mixed(config),
            GeneratorKind::Csv => {
                config.validate()?;
                let path = config.path.as_deref().expect("validated");
                load_csv(path, config.chunk_size, config.header)
            }
        }
    }
}

impl<F> Stream<F> {
    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn total_instances(&self) -> usize {
        self.chunks.iter().map(Chunk::len).sum()
    }
}

/// SEA labeling rule: class 1 iff `f1 + f2 <= threshold`.
pub fn sea_label(f1: f64, f2: f64, threshold: f64) -> usize {
    usize::from(f1 + f2 <= threshold)
}

/// SINE1 rule. Concept 0 labels 1 below the curve, concept 1 is its reversal.
pub fn sine_label(x1: f64, x2: f64, concept: usize) -> usize {
    let below = x2 < x1.sin();
    usize::from(below == (concept % 2 == 0))
}

/// Mixed rule: class 1 iff at least two of `v`, `w`, `y < 0.5 + 0.3 sin(3 pi x)`
/// hold. Concept 1 reverses the labels.
pub fn mixed_label(v: bool, w: bool, x: f64, y: f64, concept: usize) -> usize {
    let curve = y < 0.5 + 0.3 * (3.0 * std::f64::consts::PI * x).sin();
    let hits = usize::from(v) + usize::from(w) + usize::from(curve);
    usize::from((hits >= 2) == (concept % 2 == 0))
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn build<F, G>(config: &StreamConfig, n_features: usize, mut draw: G) -> Stream<F>
where
    F: Scalar,
    G: FnMut(&mut ChaCha8Rng, usize) -> (Vec<f64>, usize),
{
    let chunks = (0..config.n_chunks)
        .map(|c| {
            let mut rng = chunk_rng(config.seed, c);
            let concept = config.concept_at(c);
            let instances = (0..config.chunk_size)
                .map(|_| {
                    let (features, label) = draw(&mut rng, concept);
                    Instance {
                        features: features.into_iter().map(F::lit).collect(),
                        label,
                    }
                })
                .collect();
            Chunk {
                index: c,
                instances,
            }
        })
        .collect();
    Stream { chunks, n_features }
}

fn expect_kind(config: &StreamConfig, kind: GeneratorKind) -> Result<(), StreamError> {
    if config.kind != kind {
        return Err(StreamError::Config(format!(
            "expected a {kind:?} configuration, got {:?}",
            config.kind
        )));
    }
    config.validate()
}

/// SEA concepts: three features uniform on `[0, 10]`, threshold on `f1 + f2`
/// cycling every `drift_period` chunks, labels flipped with probability `noise`.
pub fn gen_sea<F: Scalar>(config: &StreamConfig) -> Result<Stream<F>, StreamError> {
    expect_kind(config, GeneratorKind::Sea)?;
    let thresholds = config.sea_thresholds.clone();
    let noise = config.noise;
    Ok(build(config, 3, |rng, concept| {
        let f: Vec<f64> = (0..3).map(|_| 10.0 * rng.gen::<f64>()).collect();
        let clean = sea_label(f[0], f[1], thresholds[concept]);
        // The flip draw is always consumed so features do not depend on `noise`.
        let flip = rng.gen::<f64>() < noise;
        (f, if flip { 1 - clean } else { clean })
    }))
}

/// SINE1 with reversal drift; two features uniform on `[0, 1]`.
pub fn gen_sine<F: Scalar>(config: &StreamConfig) -> Result<Stream<F>, StreamError> {
    expect_kind(config, GeneratorKind::Sine)?;
    Ok(build(config, 2, |rng, concept| {
        let x1: f64 = rng.gen();
        let x2: f64 = rng.gen();
        (vec![x1, x2], sine_label(x1, x2, concept))
    }))
}

/// Mixed with reversal drift; features `[v, w, x, y]`, booleans as 0.0/1.0.
pub fn gen_mixed<F: Scalar>(config: &StreamConfig) -> Result<Stream<F>, StreamError> {
    expect_kind(config, GeneratorKind::Mixed)?;
    Ok(build(config, 4, |rng, concept| {
        let v: bool = rng.gen();
        let w: bool = rng.gen();
        let x: f64 = rng.gen();
        let y: f64 = rng.gen();
        let label = mixed_label(v, w, x, y, concept);
        (
            vec![f64::from(u8::from(v)), f64::from(u8::from(w)), x, y],
            label,
        )
    }))
}

/// Reads a comma-separated file whose last column is an integer class label
/// and splits it, in file order, into chunks of `chunk_size` rows. A trailing
/// partial chunk is kept.
pub fn load_csv<F: Scalar>(
    path: &Path,
    chunk_size: usize,
    header: bool,
) -> Result<Stream<F>, StreamError> {
    if chunk_size == 0 {
        return Err(StreamError::Config("chunk_size must be positive".into()));
    }
    let file = std::fs::File::open(path).map_err(|source| StreamError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .from_reader(file);

    let ingest = |line: u64, message: String| StreamError::Ingest {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut width: Option<usize> = None;
    let mut instances = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            ingest(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cols = record.len();
        if cols < 2 {
            return Err(ingest(
                line,
                format!("expected at least 2 columns, found {cols}"),
            ));
        }
        match width {
            None => width = Some(cols),
            Some(w) if w != cols => {
                return Err(ingest(line, format!("expected {w} columns, found {cols}")));
            }
            Some(_) => {}
        }
        let mut features = Vec::with_capacity(cols - 1);
        for (i, cell) in record.iter().take(cols - 1).enumerate() {
            let value: f64 = cell
                .trim()
                .parse()
                .map_err(|_| ingest(line, format!("column {} is not a number: {cell:?}", i + 1)))?;
            features.push(F::lit(value));
        }
        let raw = record.get(cols - 1).unwrap_or_default().trim();
        let label: usize = raw.parse().map_err(|_| {
            ingest(
                line,
                format!("label is not a non-negative integer: {raw:?}"),
            )
        })?;
        instances.push(Instance { features, label });
    }
    let n_features = match width {
        Some(w) => w - 1,
        None => return Err(ingest(0, "file contains no data rows".into())),
    };

    let mut chunks = Vec::with_capacity(instances.len().div_ceil(chunk_size));
    let mut rows = instances.into_iter().peekable();
    while rows.peek().is_some() {
        let batch: Vec<_> = rows.by_ref().take(chunk_size).collect();
        chunks.push(Chunk {
            index: chunks.len(),
            instances: batch,
        });
    }
    Ok(Stream { chunks, n_features })
}
