use dtd_core::{
    CandidateKind, DetectorKind, DetectorParams, DriftMonitor, DtdSettings, DtdState, GaussianNb,
    GeneratorKind, Phase, StepEvent, StepReport, Stream, StreamConfig, TrainingMode,
};
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Setup {
    generator: GeneratorKind,
    seed: u64,
    kind: DetectorKind,
    theta: f64,
    k: usize,
    mode: TrainingMode,
}

fn setups() -> impl Strategy<Value = Setup> {
    (
        prop::sample::select(vec![
            GeneratorKind::Sea,
            GeneratorKind::Sine,
            GeneratorKind::Mixed,
        ]),
        0u64..1000,
        prop::sample::select(DetectorKind::ALL.to_vec()),
        0.0f64..1.5,
        1usize..6,
        prop::sample::select(vec![TrainingMode::Continual, TrainingMode::Sporadic]),
    )
        .prop_map(|(generator, seed, kind, theta, k, mode)| Setup {
            generator,
            seed,
            kind,
            theta,
            k,
            mode,
        })
}

fn stream(s: &Setup) -> Stream<f64> {
    let config = StreamConfig::new(s.generator)
        .with_size(24, 150)
        .with_drift_period(6)
        .with_seed(s.seed);
    Stream::generate(&config).unwrap()
}

fn state(s: &Setup, stream: &Stream<f64>) -> DtdState<f64> {
    let mut params = DetectorParams::default();
    params.kswin.window = 12;
    params.kswin.recent = 4;
    let detector = DriftMonitor::new(s.kind, &params).with_threshold(s.theta);
    let settings = DtdSettings {
        k: s.k,
        eta: 1e-6,
        mode: s.mode,
    };
    let mut st = DtdState::new(GaussianNb::default(), detector, settings).unwrap();
    st.warm_up(&stream.chunks[0]).unwrap();
    st
}

fn trace(s: &Setup) -> Vec<StepReport<f64>> {
    let stream = stream(s);
    let mut st = state(s, &stream);
    stream.chunks[1..]
        .iter()
        .map(|c| st.step(c).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_state_is_consistent(s in setups()) {
        let stream = stream(&s);
        let mut st = state(&s, &stream);
        for chunk in &stream.chunks[1..] {
            st.step(chunk).unwrap();
            let active = st.in_comparison();
            prop_assert_eq!(active, st.candidates().is_some());
            prop_assert_eq!(active, (1..=s.k).contains(&st.remaining()));
            if active {
                for (_, c) in st.candidates().unwrap().iter() {
                    prop_assert!(c.accuracies.iter().all(|a| (0.0..=1.0).contains(a)));
                }
            }
        }
    }

    #[test]
    fn comparison_lasts_k_chunks_and_freezes_primary(s in setups()) {
        let stream = stream(&s);
        let mut st = state(&s, &stream);
        let mut pending: Option<(usize, usize)> = None;
        for (i, chunk) in stream.chunks[1..].iter().enumerate() {
            let primary_updates = st.detector().n_updates();
            let was_active = st.in_comparison();
            let r = st.step(chunk).unwrap();
            if was_active {
                prop_assert_eq!(r.phase, Phase::Comparison);
                prop_assert!(!r.alarm);
                let (start, _) = pending.unwrap();
                let finished = r.event.is_some();
                prop_assert_eq!(finished, i - start == s.k);
                if finished {
                    prop_assert!(matches!(r.event, Some(StepEvent::Finalized(_))));
                    pending = None;
                } else {
                    prop_assert_eq!(st.detector().n_updates(), primary_updates);
                }
            } else {
                prop_assert_eq!(r.phase, Phase::Normal);
                if r.event == Some(StepEvent::PhaseStarted) {
                    prop_assert!(r.alarm);
                    prop_assert_eq!(st.leader(), CandidateKind::Rdm);
                    prop_assert_eq!(st.remaining(), s.k);
                    pending = Some((i, primary_updates));
                }
            }
        }
    }

    #[test]
    fn candidate_logs_grow_by_one_and_leader_lags(s in setups()) {
        let stream = stream(&s);
        let mut st = state(&s, &stream);
        for chunk in &stream.chunks[1..] {
            if !st.in_comparison() {
                st.step(chunk).unwrap();
                continue;
            }
            let leader = st.leader();
            let before: Vec<usize> = st.candidates().unwrap().iter().map(|(_, c)| c.accuracies.len()).collect();
            let r = st.step(chunk).unwrap();
            if let Some(set) = st.candidates() {
                let after: Vec<usize> = set.iter().map(|(_, c)| c.accuracies.len()).collect();
                prop_assert!(before.iter().zip(&after).all(|(b, a)| a == &(b + 1)));
                prop_assert_eq!(set.get(leader).accuracies.last().copied(), Some(r.accuracy));
            }
        }
    }

    #[test]
    fn threshold_changes_only_at_finalization_by_one_of_three_rules(s in setups()) {
        let stream = stream(&s);
        let mut st = state(&s, &stream);
        let mut theta = st.threshold();
        let mut at_alarm: Option<(f64, f64, f64)> = None;
        for chunk in &stream.chunks[1..] {
            let s_prev = st.prev_statistic();
            let r = st.step(chunk).unwrap();
            if r.event == Some(StepEvent::PhaseStarted) {
                at_alarm = Some((s_prev, theta, r.statistic));
            }
            match r.event {
                Some(StepEvent::Finalized(winner)) => {
                    let (s_prev, old, s_alarm) = at_alarm.take().unwrap();
                    let expected = match winner {
                        CandidateKind::Edm => s_prev,
                        CandidateKind::Rdm => old,
                        CandidateKind::Pm => s_alarm + 1e-6,
                    };
                    prop_assert_eq!(r.threshold, expected, "winner {:?}", winner);
                    theta = r.threshold;
                }
                _ => prop_assert_eq!(r.threshold, theta),
            }
        }
    }

    #[test]
    fn normal_chunks_report_primary_accuracy(s in setups()) {
        let stream = stream(&s);
        let mut st = state(&s, &stream);
        for chunk in &stream.chunks[1..] {
            let primary = (!st.in_comparison()).then(|| st.model().accuracy(chunk).unwrap());
            let r = st.step(chunk).unwrap();
            if let Some(a) = primary {
                prop_assert_eq!(r.accuracy, a);
            }
        }
    }

    #[test]
    fn comparison_cost_is_at_most_three_normal_chunks(s in setups()) {
        let n = 150;
        for r in trace(&s).iter().filter(|r| r.phase == Phase::Comparison) {
            prop_assert_eq!(r.work.predicted, 3 * n);
            prop_assert!(r.work.trained <= 3 * n);
            prop_assert!(r.work.total() <= 3 * (2 * n));
        }
    }

    #[test]
    fn identical_inputs_give_identical_traces(s in setups()) {
        prop_assert_eq!(trace(&s), trace(&s));
    }

    #[test]
    fn unreachable_threshold_matches_plain_prequential(seed in 0u64..1000, mode in prop::sample::select(vec![TrainingMode::Continual, TrainingMode::Sporadic])) {
        let s = Setup { generator: GeneratorKind::Sea, seed, kind: DetectorKind::Ddm, theta: 1e12, k: 3, mode };
        let stream = stream(&s);
        let mut model = GaussianNb::default();
        model.train(&stream.chunks[0]).unwrap();
        for (chunk, r) in stream.chunks[1..].iter().zip(trace(&s)) {
            prop_assert_eq!(r.accuracy, model.accuracy(chunk).unwrap());
            prop_assert_eq!(r.phase, Phase::Normal);
            if mode == TrainingMode::Continual {
                model.train(chunk).unwrap();
            }
        }
    }
}

#[test]
fn property_setups_exercise_every_winner() {
    let mut seen = std::collections::BTreeMap::new();
    for seed in 0..40 {
        for kind in DetectorKind::ALL {
            let s = Setup {
                generator: GeneratorKind::Mixed,
                seed,
                kind,
                theta: 0.2,
                k: 2,
                mode: TrainingMode::Continual,
            };
            for r in trace(&s) {
                if let Some(StepEvent::Finalized(w)) = r.event {
                    *seen.entry(w).or_insert(0usize) += 1;
                }
            }
        }
    }
    assert_eq!(seen.len(), 3, "{seen:?}");
}
