use std::collections::VecDeque;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Statistic;
use crate::scalar::Scalar;

/// Kolmogorov-Smirnov windowing.
///
/// Once `window` values are buffered, the newest `recent` values are compared
/// with `recent` values drawn without replacement from the older part of the
/// window. The statistic is the two-sample KS distance; before the window is
/// full it is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Kswin<F> {
    window: usize,
    recent: usize,
    seed: u64,
    buf: VecDeque<F>,
    rng: ChaCha8Rng,
}

impl<F: Scalar> Kswin<F> {
    pub fn new(window: usize, recent: usize, seed: u64) -> Self {
        Self {
            window,
            recent,
            seed,
            buf: VecDeque::with_capacity(window + 1),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }
}

impl<F: Scalar> Statistic<F> for Kswin<F> {
    fn update(&mut self, x: F) -> F {
        self.buf.push_back(x);
        if self.buf.len() > self.window {
            self.buf.pop_front();
        }
        if self.buf.len() < self.window {
            return F::zero();
        }
        let old_len = self.window - self.recent;
        let sampled: Vec<F> = index::sample(&mut self.rng, old_len, self.recent)
            .into_iter()
            .map(|i| self.buf[i])
            .collect();
        let newest: Vec<F> = self.buf.range(old_len..).copied().collect();
        ks_distance(&sampled, &newest)
    }

    fn reset(&mut self) {
        *self = Self::new(self.window, self.recent, self.seed);
    }
}

/// Two-sample Kolmogorov-Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
///
/// Returns zero when either sample is empty.
pub fn ks_distance<F: Scalar>(a: &[F], b: &[F]) -> F {
    if a.is_empty() || b.is_empty() {
        return F::zero();
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let cmp = |x: &F, y: &F| x.partial_cmp(y).expect("finite samples");
    a.sort_by(cmp);
    b.sort_by(cmp);
    let (na, nb) = (F::from_count(a.len()), F::from_count(b.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = F::zero();
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((F::from_count(i) / na - F::from_count(j) / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Evaluates both empirical CDFs at every observed point.
    fn exhaustive(a: &[f64], b: &[f64]) -> f64 {
        let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        a.iter()
            .chain(b)
            .map(|&x| (cdf(a, x) - cdf(b, x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ks_distance_examples() {
        assert_eq!(ks_distance(&[0.1; 30], &[0.1; 30]), 0.0);
        assert_eq!(ks_distance(&[0.1; 30], &[0.9; 30]), 1.0);
        let a = [0.1, 0.4, 0.4, 0.7, 0.2];
        let b = [0.3, 0.4, 0.8, 0.8];
        assert!((ks_distance(&a, &b) - exhaustive(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn not_full_is_zero() {
        let mut k = Kswin::<f64>::new(100, 30, 1);
        for i in 0..99 {
            assert_eq!(k.update(if i % 2 == 0 { 0.0 } else { 1.0 }), 0.0);
        }
    }

    #[test]
    fn identical_window_is_zero() {
        let mut k = Kswin::<f64>::new(100, 30, 1);
        let mut s = 1.0;
        for _ in 0..130 {
            s = k.update(0.3);
        }
        assert_eq!(s, 0.0);
    }

    #[test]
    fn separated_recent_values_give_unit_distance() {
        let mut k = Kswin::<f64>::new(100, 30, 9);
        for _ in 0..70 {
            k.update(0.1);
        }
        let mut s = 0.0;
        for _ in 0..30 {
            s = k.update(0.9);
        }
        let theta = (-(0.005f64).ln() / 30.0).sqrt();
        assert_eq!(s, 1.0);
        assert!(s > theta);
        assert!((theta - 0.420_2).abs() < 1e-4);
    }

    proptest::proptest! {
        #[test]
        fn ks_distance_matches_exhaustive(
            a in proptest::collection::vec(0u8..6, 1..25),
            b in proptest::collection::vec(0u8..6, 1..25),
        ) {
            let a: Vec<f64> = a.into_iter().map(|v| v as f64 / 5.0).collect();
            let b: Vec<f64> = b.into_iter().map(|v| v as f64 / 5.0).collect();
            proptest::prop_assert!((ks_distance(&a, &b) - exhaustive(&a, &b)).abs() < 1e-12);
        }
    }
}
