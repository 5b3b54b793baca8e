use super::Statistic;
use crate::scalar::Scalar;

/// Drift Detection Method over chunk error rates.
///
/// Keeps the running mean `p` of all inputs and `s = sqrt(p(1-p)/n)`, and the
/// pair `(p_min, s_min)` at which `p + s` was smallest. The statistic is the
/// excess of `p + s` over that minimum in units of `s_min`:
/// `(p + s - (p_min + s_min)) / s_min`, or zero while fewer than
/// `min_samples` values were seen or when `s_min == 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ddm<F> {
    min_samples: usize,
    n: usize,
    p: F,
    min: Option<(F, F)>,
}

impl<F: Scalar> Ddm<F> {
    pub fn new(min_samples: usize) -> Self {
        Self {
            min_samples,
            n: 0,
            p: F::zero(),
            min: None,
        }
    }

    pub fn mean(&self) -> F {
        self.p
    }

    /// `(p_min, s_min)`, once `min_samples` values were seen.
    pub fn minimum(&self) -> Option<(F, F)> {
        self.min
    }
}

impl<F: Scalar> Statistic<F> for Ddm<F> {
    fn update(&mut self, x: F) -> F {
        self.n += 1;
        let n = F::from_count(self.n);
        self.p = self.p + (x - self.p) / n;
        let s = (self.p * (F::one() - self.p)).max(F::zero()).sqrt() / n.sqrt();
        if self.n < self.min_samples {
            return F::zero();
        }
        match self.min {
            Some((pm, sm)) if pm + sm <= self.p + s => {}
            _ => self.min = Some((self.p, s)),
        }
        let (pm, sm) = self.min.expect("set above");
        if sm > F::zero() {
            ((self.p + s - (pm + sm)) / sm).max(F::zero())
        } else {
            F::zero()
        }
    }

    fn reset(&mut self) {
        *self = Self::new(self.min_samples);
    }
}
