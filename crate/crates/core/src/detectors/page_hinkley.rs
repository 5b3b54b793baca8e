use super::Statistic;
use crate::scalar::Scalar;

/// Page-Hinkley test for an increase of the mean.
///
/// `m_t = sum_{i<=t} (x_i - mean_i - delta)` with `mean_i` the running mean
/// including `x_i`; the statistic is `m_t - min_{i<=t} m_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PageHinkley<F> {
    delta: F,
    n: usize,
    mean: F,
    cum: F,
    min_cum: F,
}

impl<F: Scalar> PageHinkley<F> {
    pub fn new(delta: F) -> Self {
        Self {
            delta,
            n: 0,
            mean: F::zero(),
            cum: F::zero(),
            min_cum: F::infinity(),
        }
    }

    pub fn cumulative(&self) -> F {
        self.cum
    }
}

impl<F: Scalar> Statistic<F> for PageHinkley<F> {
    fn update(&mut self, x: F) -> F {
        self.n += 1;
        self.mean = self.mean + (x - self.mean) / F::from_count(self.n);
        self.cum = self.cum + x - self.mean - self.delta;
        self.min_cum = self.min_cum.min(self.cum);
        self.cum - self.min_cum
    }

    fn reset(&mut self) {
        *self = Self::new(self.delta);
    }
}
