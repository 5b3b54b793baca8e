use dtd_core::{DetectorKind, DetectorParams, DriftMonitor};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

fn kinds() -> impl Strategy<Value = DetectorKind> {
    prop::sample::select(DetectorKind::ALL.to_vec())
}

/// Error-rate sequences: long enough to fill the KSWIN window, with a mix
/// of flat stretches and jumps.
fn rates() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0.0f64..=1.0, 1usize..40), 1..12).prop_map(|runs| {
        runs.into_iter()
            .flat_map(|(v, n)| std::iter::repeat(v).take(n))
            .collect()
    })
}

fn monitor(kind: DetectorKind) -> DriftMonitor<f64> {
    DriftMonitor::new(kind, &DetectorParams::default())
}

fn statistics(d: &mut DriftMonitor<f64>, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| d.update(x).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn statistic_is_finite_and_non_negative(kind in kinds(), xs in rates()) {
        let mut d = monitor(kind);
        for &x in &xs {
            let s = d.update(x).unwrap();
            prop_assert!(s.is_finite() && s >= 0.0, "{kind:?} gave {s}");
            prop_assert_eq!(s, d.statistic());
        }
    }

    #[test]
    fn alarm_iff_statistic_exceeds_threshold(kind in kinds(), xs in rates(), theta in 0.0f64..3.0) {
        let mut d = monitor(kind).with_threshold(theta);
        for &x in &xs {
            let s = d.update(x).unwrap();
            prop_assert_eq!(d.alarm(), s > theta);
        }
    }

    #[test]
    fn raising_threshold_never_adds_alarms(kind in kinds(), xs in rates(), lo in 0.0f64..2.0, step in 0.0f64..2.0) {
        let count = |theta: f64| {
            let mut d = monitor(kind).with_threshold(theta);
            xs.iter().filter(|&&x| { d.update(x).unwrap(); d.alarm() }).count()
        };
        prop_assert!(count(lo + step) <= count(lo));
    }

    #[test]
    fn threshold_writes_leave_history_alone(kind in kinds(), xs in rates(), at in any::<prop::sample::Index>(), theta in -1.0f64..5.0) {
        let cut = at.index(xs.len());
        let mut plain = monitor(kind);
        let mut touched = monitor(kind);
        statistics(&mut plain, &xs[..cut]);
        statistics(&mut touched, &xs[..cut]);
        touched.set_threshold(theta).unwrap();
        prop_assert_eq!(touched.threshold(), theta);
        prop_assert_eq!(touched.statistic(), plain.statistic());
        prop_assert_eq!(statistics(&mut touched, &xs[cut..]), statistics(&mut plain, &xs[cut..]));
    }

    #[test]
    fn clones_are_independent(kind in kinds(), xs in rates(), ys in rates()) {
        let mut a = monitor(kind);
        statistics(&mut a, &xs);
        let before = a.clone();
        let mut b = a.clone();
        statistics(&mut b, &ys);
        prop_assert_eq!(&a, &before);
        let mut c = before.clone();
        prop_assert_eq!(statistics(&mut a, &ys), statistics(&mut c, &ys));
    }

    #[test]
    fn reset_matches_fresh_detector(kind in kinds(), xs in rates(), ys in rates(), theta in 0.1f64..4.0) {
        let mut used = monitor(kind).with_threshold(theta);
        statistics(&mut used, &xs);
        used.reset();
        prop_assert_eq!(used.threshold(), theta);
        prop_assert_eq!(used.statistic(), 0.0);
        let mut fresh = monitor(kind).with_threshold(theta);
        prop_assert_eq!(statistics(&mut used, &ys), statistics(&mut fresh, &ys));
    }

    #[test]
    fn out_of_range_input_is_rejected(kind in kinds(), bad in prop_oneof![-10.0f64..-1e-9, 1.0000001f64..10.0]) {
        let mut d = monitor(kind);
        prop_assert!(d.update(bad).is_err());
        prop_assert!(d.update(f64::NAN).is_err());
    }

    #[test]
    fn threshold_above_current_statistic_silences_alarm(kind in kinds(), xs in rates()) {
        let mut d = monitor(kind);
        statistics(&mut d, &xs);
        d.set_threshold(d.statistic() + 1e-6).unwrap();
        prop_assert!(!d.alarm());
    }
}

#[test]
fn non_finite_thresholds_are_rejected_by_setter() {
    for kind in DetectorKind::ALL {
        let mut d = monitor(kind);
        assert!(d.set_threshold(f64::INFINITY).is_err());
        assert!(d.set_threshold(f64::NAN).is_err());
        let d = d.with_threshold(f64::INFINITY);
        assert_eq!(d.threshold(), f64::INFINITY);
    }
}

fn noisy(rng: &mut ChaCha8Rng, p: f64, n: usize) -> Vec<f64> {
    let dist = Binomial::new(1000, p).unwrap();
    (0..n).map(|_| dist.sample(rng) as f64 / 1000.0).collect()
}

#[test]
fn stationary_input_rarely_alarms() {
    for kind in DetectorKind::ALL {
        let mut alarms = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let mut params = DetectorParams::default();
            params.kswin.seed += seed;
            let mut d = DriftMonitor::new(kind, &params);
            for x in noisy(&mut rng, 0.3, 300) {
                d.update(x).unwrap();
                if d.alarm() {
                    alarms += 1;
                    d.reset();
                }
            }
        }
        let per_100 = alarms as f64 / 300.0;
        assert!(per_100 <= 1.0, "{kind:?}: {per_100} alarms per 100 updates");
    }
}

#[test]
fn step_change_is_detected_within_twenty_updates() {
    for kind in DetectorKind::ALL {
        let mut hits = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
            let mut d = monitor(kind);
            let mut xs = noisy(&mut rng, 0.1, 80);
            xs.extend(noisy(&mut rng, 0.6, 20));
            let mut hit = false;
            for (i, x) in xs.into_iter().enumerate() {
                d.update(x).unwrap();
                if d.alarm() {
                    hit |= i >= 80;
                    d.reset();
                }
            }
            hits += usize::from(hit);
        }
        assert!(hits >= 95, "{kind:?}: detected in {hits}/100 seeds");
    }
}
