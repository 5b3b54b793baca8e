use super::Statistic;
use crate::scalar::Scalar;

/// Hoeffding-bound drift detector on moving averages (HDDM-A).
///
/// The cut point is the prefix minimizing `mean + sqrt(ln(1/alpha) / (2n))`
/// (latest prefix on ties). The statistic compares the post-cut mean with the
/// cut mean, scaled by the two-sample Hoeffding bound
/// `sqrt(ln(1/alpha)/2 * (1/n1 + 1/n2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct HddmA<F> {
    alpha: F,
    log_inv_alpha: F,
    n: usize,
    sum: F,
    cut: Option<Cut<F>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cut<F> {
    n: usize,
    sum: F,
    score: F,
}

impl<F: Scalar> HddmA<F> {
    pub fn new(alpha: F) -> Self {
        Self {
            alpha,
            log_inv_alpha: -alpha.ln(),
            n: 0,
            sum: F::zero(),
            cut: None,
        }
    }

    /// `(n1, mean1)` of the current cut.
    pub fn cut(&self) -> Option<(usize, F)> {
        self.cut.map(|c| (c.n, c.sum / F::from_count(c.n)))
    }
}

impl<F: Scalar> Statistic<F> for HddmA<F> {
    fn update(&mut self, x: F) -> F {
        self.n += 1;
        self.sum = self.sum + x;
        let n = F::from_count(self.n);
        let score = self.sum / n + (self.log_inv_alpha / (F::lit(2.0) * n)).sqrt();
        if self.cut.map_or(true, |c| score <= c.score) {
            self.cut = Some(Cut {
                n: self.n,
                sum: self.sum,
                score,
            });
        }
        let cut = self.cut.expect("set above");
        let n2 = self.n - cut.n;
        if cut.n == 0 || n2 == 0 {
            return F::zero();
        }
        let (n1, n2f) = (F::from_count(cut.n), F::from_count(n2));
        let mu1 = cut.sum / n1;
        let mu2 = (self.sum - cut.sum) / n2f;
        let eps = (self.log_inv_alpha / F::lit(2.0) * (F::one() / n1 + F::one() / n2f)).sqrt();
        ((mu2 - mu1) / eps).max(F::zero())
    }

    fn reset(&mut self) {
        *self = Self::new(self.alpha);
    }
}

/// Hoeffding-bound drift detector on an exponentially weighted mean (HDDM-W).
///
/// Tracks `Z_t = lambda x_t + (1 - lambda) Z_{t-1}` (with `Z_1 = x_1`) and its
/// running minimum; the statistic is `(Z_t - Z_min) / eps` with
/// `eps = sqrt(lambda / (2 - lambda) * ln(1/alpha) / 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HddmW<F> {
    lambda: F,
    alpha: F,
    eps: F,
    z: Option<F>,
    z_min: F,
}

impl<F: Scalar> HddmW<F> {
    pub fn new(lambda: F, alpha: F) -> Self {
        let two = F::lit(2.0);
        Self {
            lambda,
            alpha,
            eps: (lambda / (two - lambda) * (-alpha.ln()) / two).sqrt(),
            z: None,
            z_min: F::infinity(),
        }
    }

    pub fn ewma(&self) -> Option<F> {
        self.z
    }

    pub fn bound(&self) -> F {
        self.eps
    }
}

impl<F: Scalar> Statistic<F> for HddmW<F> {
    fn update(&mut self, x: F) -> F {
        let z = match self.z {
            None => x,
            Some(z) => self.lambda * x + (F::one() - self.lambda) * z,
        };
        self.z = Some(z);
        self.z_min = self.z_min.min(z);
        ((z - self.z_min) / self.eps).max(F::zero())
    }

    fn reset(&mut self) {
        *self = Self::new(self.lambda, self.alpha);
    }
}
