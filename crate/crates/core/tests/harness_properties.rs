use std::path::Path;

use dtd_core::harness::{
    self, run_baseline, run_config, run_dtd, run_seed, stream_for, summarize, ExperimentConfig,
    Method, MethodSelection,
};
use dtd_core::{DetectorKind, GaussianNb, StreamConfig, TrainingMode};
use proptest::prelude::*;

fn small(
    name: &str,
    stream: StreamConfig,
    kind: DetectorKind,
    mode: TrainingMode,
) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(name, stream.with_size(30, 200), kind, mode);
    c.seeds = (0..4).collect();
    c
}

fn modes() -> impl Strategy<Value = TrainingMode> {
    prop::sample::select(vec![TrainingMode::Continual, TrainingMode::Sporadic])
}

#[test]
fn stationary_stream_dtd_tracks_baseline() {
    for kind in DetectorKind::ALL {
        let stream = StreamConfig::sea(0.0).with_sea_thresholds(vec![8.0]);
        let c = ExperimentConfig::new(
            format!("flat-{}", kind.name()),
            stream,
            kind,
            TrainingMode::Continual,
        );
        let b = run_baseline(&c).unwrap().mean_accuracy();
        let d = run_dtd(&c).unwrap().mean_accuracy();
        assert!(
            100.0 * (d - b).abs() <= 0.5,
            "{kind:?}: baseline {b}, dtd {d}"
        );
    }
}

#[test]
fn infinite_threshold_baseline_is_never_adapt_prequential() {
    for mode in [TrainingMode::Continual, TrainingMode::Sporadic] {
        let mut c = small("inf", StreamConfig::sea(0.1), DetectorKind::Ddm, mode);
        c.method = MethodSelection::Baseline;
        c.detector.threshold = Some(f64::INFINITY);
        for run in &run_baseline(&c).unwrap().runs {
            assert!(run.alarms().is_empty());
            let stream = stream_for(&c, run.seed).unwrap();
            let mut model = GaussianNb::default();
            model.train(&stream.chunks[0]).unwrap();
            for (chunk, rec) in stream.chunks[1..].iter().zip(&run.records) {
                assert_eq!(rec.accuracy, model.accuracy(chunk).unwrap());
                if mode.is_continual() {
                    model.train(chunk).unwrap();
                }
            }
        }
    }
}

#[test]
fn negative_threshold_alarms_on_every_chunk() {
    let mut c = small(
        "neg",
        StreamConfig::sea(0.0),
        DetectorKind::Ph,
        TrainingMode::Continual,
    );
    c.detector.threshold = Some(-1.0);
    for run in &run_baseline(&c).unwrap().runs {
        assert_eq!(run.alarms().len(), run.records.len());
        let stream = stream_for(&c, run.seed).unwrap();
        let mut model = GaussianNb::default();
        model.train(&stream.chunks[0]).unwrap();
        for (chunk, rec) in stream.chunks[1..].iter().zip(&run.records) {
            assert_eq!(rec.accuracy, model.accuracy(chunk).unwrap());
            model = model.adapt(chunk).unwrap();
        }
    }
}

#[test]
fn dtd_threshold_moves_only_at_finalization() {
    let mut c = small(
        "ph",
        StreamConfig::new(dtd_core::GeneratorKind::Mixed),
        DetectorKind::Ph,
        TrainingMode::Continual,
    );
    c.detector.threshold = Some(0.05);
    let mut finalized = 0;
    for run in &run_dtd(&c).unwrap().runs {
        let mut theta = 0.05;
        for rec in &run.records {
            if rec.winner.is_some() {
                finalized += 1;
                theta = rec.threshold;
            }
            assert_eq!(rec.threshold, theta);
        }
    }
    assert!(finalized > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn methods_see_identical_streams(seed in 0u64..10_000, mode in modes()) {
        let c = small("pair", StreamConfig::sea(0.2), DetectorKind::Ph, mode);
        let a = stream_for(&c, seed).unwrap();
        prop_assert_eq!(&a, &stream_for(&c, seed).unwrap());
        prop_assert_ne!(&a, &stream_for(&c, seed + 1).unwrap());
        let b = run_seed(&c, Method::Baseline, seed).unwrap();
        let d = run_seed(&c, Method::Dtd, seed).unwrap();
        let idx = |r: &harness::SeedRun| r.records.iter().map(|x| x.chunk_index).collect::<Vec<_>>();
        prop_assert_eq!(idx(&b), idx(&d));
        prop_assert_eq!(idx(&b), (1..30).collect::<Vec<_>>());
    }

    #[test]
    fn seed_runs_depend_only_on_their_seed(seed in 0u64..10_000, kind in prop::sample::select(DetectorKind::ALL.to_vec())) {
        let mut alone = small("indep", StreamConfig::new(dtd_core::GeneratorKind::Sine), kind, TrainingMode::Continual);
        alone.seeds = vec![seed];
        let mut crowd = alone.clone();
        crowd.seeds = vec![seed + 7, seed, seed + 3];
        for method in [Method::Baseline, Method::Dtd] {
            let one = harness::run_experiment(&alone, method).unwrap();
            let many = harness::run_experiment(&crowd, method).unwrap();
            prop_assert_eq!(&one.runs[0], &many.runs[1]);
        }
    }

    #[test]
    fn report_is_reproducible(seed in 0u64..1000) {
        let mut c = small("repro", StreamConfig::new(dtd_core::GeneratorKind::Mixed), DetectorKind::Ph, TrainingMode::Sporadic);
        c.seeds = vec![seed, seed + 1];
        let first = summarize(&run_config(&c).unwrap()).unwrap().to_json();
        let second = summarize(&run_config(&c).unwrap()).unwrap().to_json();
        prop_assert_eq!(first, second);
    }
}

/// Reads one trace file without the library's loader.
fn csv_accuracies(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("chunk_index,accuracy,statistic,threshold,alarm,phase")
    );
    lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn report_statistics_match_recomputation_from_traces() {
    let mut configs = vec![
        small(
            "sea10-ph",
            StreamConfig::sea(0.1),
            DetectorKind::Ph,
            TrainingMode::Continual,
        ),
        small(
            "mixed-hddm",
            StreamConfig::new(dtd_core::GeneratorKind::Mixed),
            DetectorKind::HddmW,
            TrainingMode::Sporadic,
        ),
    ];
    configs[0].seeds = vec![2, 5, 11, 17, 23];
    let results = harness::run_suite(&configs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for r in &results {
        harness::write_result(dir.path(), r).unwrap();
    }
    let report = summarize(&results).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();

    for config in &configs {
        for method in [Method::Baseline, Method::Dtd] {
            let name = config.result_name(method);
            let per_seed: Vec<f64> = config
                .seeds
                .iter()
                .map(|s| {
                    let accs = csv_accuracies(&dir.path().join(&name).join(format!("seed{s}.csv")));
                    assert_eq!(accs.len(), config.stream.n_chunks - 1);
                    accs.iter().sum::<f64>() / accs.len() as f64
                })
                .collect();
            let n = per_seed.len() as f64;
            let mean = per_seed.iter().sum::<f64>() / n;
            let std = (per_seed.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();

            let cell = json["cells"]
                .as_array()
                .unwrap()
                .iter()
                .find(|c| c["cell"] == config.name.as_str())
                .unwrap();
            let stats = &cell[method.name()];
            assert!(
                (stats["mean"].as_f64().unwrap() - mean).abs() <= 1e-12,
                "{name} mean"
            );
            assert!(
                (stats["std"].as_f64().unwrap() - std).abs() <= 1e-12,
                "{name} std"
            );

            let summary: serde_json::Value = serde_json::from_str(
                &std::fs::read_to_string(dir.path().join(&name).join("summary.json")).unwrap(),
            )
            .unwrap();
            assert!(
                (summary["mean_accuracy"].as_f64().unwrap() - mean).abs() <= 1e-12,
                "{name} summary"
            );
        }
    }

    let reloaded = harness::load_results(dir.path()).unwrap();
    let again = summarize(&reloaded).unwrap();
    for (a, b) in report.cells.iter().zip(&again.cells) {
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
        assert!(close(a.delta.unwrap(), b.delta.unwrap()));
        assert!(close(
            a.baseline.as_ref().unwrap().mean,
            b.baseline.as_ref().unwrap().mean
        ));
        assert!(close(
            a.dtd.as_ref().unwrap().std,
            b.dtd.as_ref().unwrap().std
        ));
    }
}

#[test]
fn identical_results_give_zero_deltas() {
    let c = small(
        "same",
        StreamConfig::sea(0.0),
        DetectorKind::Ddm,
        TrainingMode::Continual,
    );
    let b = run_baseline(&c).unwrap();
    let mut d = b.clone();
    d.method = Method::Dtd;
    d.name = c.result_name(Method::Dtd);
    let report = summarize(&[b, d]).unwrap();
    assert_eq!(report.cells[0].delta, Some(0.0));
    assert_eq!(report.ties, 1);
}
