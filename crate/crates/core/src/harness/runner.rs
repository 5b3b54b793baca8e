use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::HarnessError;
use crate::classifier::{evaluate, GaussianNb};
use crate::detectors::{DetectorKind, DriftMonitor};
use crate::dtd::{CandidateKind, DtdSettings, DtdState, Phase, StepEvent, TrainingMode, Work};
use crate::stream::{GeneratorKind, Stream};

/// One evaluated chunk. The first six fields are the CSV trace columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkRecord {
    pub chunk_index: usize,
    pub accuracy: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub alarm: bool,
    pub phase: Phase,
    #[serde(skip)]
    pub winner: Option<CandidateKind>,
    #[serde(skip)]
    pub work: Work,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub records: Vec<ChunkRecord>,
}

impl SeedRun {
    /// Mean accuracy over the evaluated chunks.
    pub fn accuracy(&self) -> f64 {
        let accs: Vec<f64> = self.records.iter().map(|r| r.accuracy).collect();
        crate::scalar::mean(&accs).unwrap_or(0.0)
    }

    pub fn alarms(&self) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.alarm)
            .map(|r| r.chunk_index)
            .collect()
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.threshold).collect()
    }

    pub fn winners(&self) -> Vec<(usize, CandidateKind)> {
        self.records
            .iter()
            .filter_map(|r| r.winner.map(|w| (r.chunk_index, w)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    /// Output directory name.
    pub name: String,
    /// Pairing key shared by the baseline and DTD runs of one config.
    pub cell: String,
    pub method: Method,
    pub runs: Vec<SeedRun>,
}

impl ExperimentResult {
    pub fn seed_accuracies(&self) -> Vec<f64> {
        self.runs.iter().map(SeedRun::accuracy).collect()
    }

    pub fn mean_accuracy(&self) -> f64 {
        crate::scalar::mean(&self.seed_accuracies()).unwrap_or(0.0)
    }

    /// Population standard deviation of the per-seed accuracies.
    pub fn std_accuracy(&self) -> f64 {
        crate::scalar::population_std(&self.seed_accuracies()).unwrap_or(0.0)
    }
}

/// Builds the stream for one seed. Baseline and DTD runs of the same seed
/// see identical data.
pub fn stream_for(config: &ExperimentConfig, seed: u64) -> Result<Stream<f64>, HarnessError> {
    let stream = Stream::generate(&config.stream.clone().with_seed(seed))?;
    if stream.len() < 2 {
        return Err(HarnessError::Config(
            "stream needs at least two chunks (warm-up plus one)".into(),
        ));
    }
    Ok(stream)
}

/// Detector for one seed, with the configured initial threshold.
pub fn detector_for(config: &ExperimentConfig, seed: u64) -> DriftMonitor<f64> {
    let mut params = config.detector.params.clone();
    params.kswin.seed = params.kswin.seed.wrapping_add(seed);
    DriftMonitor::new(config.detector.kind, &params).with_threshold(config.detector.threshold())
}

/// Fixed-threshold prequential loop. The model is trained on chunk 0; every
/// later chunk is evaluated, then the model is adapted (and the detector
/// cleared) on alarm, or trained under continual mode. `threshold_at` gives
/// the threshold used for each chunk index.
pub fn prequential(
    stream: &Stream<f64>,
    mut model: GaussianNb<f64>,
    mut detector: DriftMonitor<f64>,
    mode: TrainingMode,
    mut threshold_at: impl FnMut(usize) -> f64,
) -> Result<Vec<ChunkRecord>, HarnessError> {
    let (warm, rest) = stream
        .chunks
        .split_first()
        .ok_or_else(|| HarnessError::Config("empty stream".into()))?;
    model.train(warm)?;
    let mut records = Vec::with_capacity(rest.len());
    for chunk in rest {
        detector = detector.with_threshold(threshold_at(chunk.index));
        let out = evaluate(&model, chunk, &mut detector)?;
        let alarm = detector.alarm();
        if alarm {
            model = model.adapt(chunk)?;
            detector.reset();
        } else if mode.is_continual() {
            model.train(chunk)?;
        }
        let trained = if alarm || mode.is_continual() {
            chunk.len()
        } else {
            0
        };
        records.push(ChunkRecord {
            chunk_index: chunk.index,
            accuracy: out.accuracy,
            statistic: out.statistic,
            threshold: detector.threshold(),
            alarm,
            phase: Phase::Normal,
            winner: None,
            work: Work {
                predicted: chunk.len(),
                trained,
            },
        });
    }
    Ok(records)
}

/// DTD-wrapped prequential loop with the same warm-up.
pub fn prequential_dtd(
    stream: &Stream<f64>,
    model: GaussianNb<f64>,
    detector: DriftMonitor<f64>,
    settings: DtdSettings<f64>,
) -> Result<Vec<ChunkRecord>, HarnessError> {
    let (warm, rest) = stream
        .chunks
        .split_first()
        .ok_or_else(|| HarnessError::Config("empty stream".into()))?;
    let mut state = DtdState::new(model, detector, settings)?;
    state.warm_up(warm)?;
    let mut records = Vec::with_capacity(rest.len());
    for chunk in rest {
        let r = state.step(chunk)?;
        records.push(ChunkRecord {
            chunk_index: chunk.index,
            accuracy: r.accuracy,
            statistic: r.statistic,
            threshold: r.threshold,
            alarm: r.alarm,
            phase: r.phase,
            winner: match r.event {
                Some(StepEvent::Finalized(w)) => Some(w),
                _ => None,
            },
            work: r.work,
        });
    }
    Ok(records)
}

pub fn run_seed(
    config: &ExperimentConfig,
    method: Method,
    seed: u64,
) -> Result<SeedRun, HarnessError> {
    let stream = stream_for(config, seed)?;
    let model = GaussianNb::new(config.classifier.var_smoothing);
    let detector = detector_for(config, seed);
    let records = match method {
        Method::Baseline => {
            let theta = detector.threshold();
            prequential(&stream, model, detector, config.mode, |_| theta)?
        }
        Method::Dtd => {
            let settings = DtdSettings {
                k: config.k,
                eta: config.eta,
                mode: config.mode,
            };
            prequential_dtd(&stream, model, detector, settings)?
        }
    };
    Ok(SeedRun { seed, records })
}

/// Runs every seed of `config` with `method`, in parallel across seeds.
pub fn run_experiment(
    config: &ExperimentConfig,
    method: Method,
) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let runs = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, method, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentResult {
        name: config.result_name(method),
        cell: config.name.clone(),
        method,
        runs,
    })
}

pub fn run_baseline(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    run_experiment(config, Method::Baseline)
}

pub fn run_dtd(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    run_experiment(config, Method::Dtd)
}

/// Runs all methods selected by `config.method`.
pub fn run_config(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>, HarnessError> {
    config
        .method
        .methods()
        .par_iter()
        .map(|&m| run_experiment(config, m))
        .collect()
}

/// Runs many configs; results come back in config order.
pub fn run_suite(configs: &[ExperimentConfig]) -> Result<Vec<ExperimentResult>, HarnessError> {
    let nested = configs
        .par_iter()
        .map(run_config)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// The synthetic benchmark grid: SEA with 0/10/20% label noise, Sine and
/// Mixed, for every detector and both training modes.
pub fn synthetic_grid(seeds: &[u64]) -> Vec<ExperimentConfig> {
    use crate::stream::StreamConfig;
    let streams = [
        ("sea0", StreamConfig::sea(0.0)),
        ("sea10", StreamConfig::sea(0.1)),
        ("sea20", StreamConfig::sea(0.2)),
        ("sine", StreamConfig::new(GeneratorKind::Sine)),
        ("mixed", StreamConfig::new(GeneratorKind::Mixed)),
    ];
    let mut out = Vec::new();
    for (label, stream) in &streams {
        for kind in DetectorKind::ALL {
            for mode in [TrainingMode::Continual, TrainingMode::Sporadic] {
                let mode_name = if mode.is_continual() {
                    "continual"
                } else {
                    "sporadic"
                };
                let name = format!("{label}-{}-{mode_name}", kind.name().to_ascii_lowercase());
                let mut cfg = ExperimentConfig::new(name, stream.clone(), kind, mode);
                cfg.seeds = seeds.to_vec();
                out.push(cfg);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::DetectorKind;
    use crate::harness::MethodSelection;
    use crate::stream::StreamConfig;

    fn small(kind: GeneratorKind, det: DetectorKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            "t",
            StreamConfig::new(kind).with_size(12, 200),
            det,
            TrainingMode::Continual,
        );
        c.seeds = vec![1, 2];
        c
    }

    #[test]
    fn trace_shape_and_warm_up() {
        let c = small(GeneratorKind::Sine, DetectorKind::Ddm);
        let r = run_baseline(&c).unwrap();
        assert_eq!(r.runs.len(), 2);
        for run in &r.runs {
            assert_eq!(run.records.len(), 11);
            assert_eq!(run.records[0].chunk_index, 1);
        }
    }

    #[test]
    fn unreachable_threshold_is_plain_prequential() {
        let mut c = small(GeneratorKind::Sea, DetectorKind::Ph);
        c.detector.threshold = Some(f64::INFINITY);
        c.method = MethodSelection::Baseline;
        let r = run_baseline(&c).unwrap();
        let stream = stream_for(&c, 1).unwrap();
        let mut m = GaussianNb::default();
        m.train(&stream.chunks[0]).unwrap();
        let mut expected = Vec::new();
        for ch in &stream.chunks[1..] {
            expected.push(m.accuracy(ch).unwrap());
            m.train(ch).unwrap();
        }
        let got: Vec<f64> = r.runs[0].records.iter().map(|x| x.accuracy).collect();
        assert_eq!(got, expected);
        assert!(r.runs[0].alarms().is_empty());
    }

    #[test]
    fn negative_threshold_adapts_every_chunk() {
        let mut c = small(GeneratorKind::Mixed, DetectorKind::HddmA);
        c.detector.threshold = Some(-1.0);
        let r = run_baseline(&c).unwrap();
        assert_eq!(r.runs[0].alarms(), (1..12).collect::<Vec<_>>());
    }

    #[test]
    fn seeds_are_independent_and_repeatable() {
        let c = small(GeneratorKind::Sea, DetectorKind::Kswin);
        let a = run_dtd(&c).unwrap();
        let mut c2 = c.clone();
        c2.seeds = vec![2];
        let b = run_dtd(&c2).unwrap();
        assert_eq!(a.runs[1], b.runs[0]);
        assert_eq!(run_dtd(&c).unwrap(), a);
    }

    #[test]
    fn grid_has_fifty_cells() {
        let g = synthetic_grid(&[0]);
        assert_eq!(g.len(), 50);
        assert!(g.iter().any(|c| c.name == "sea0-ddm-sporadic"));
    }
}
