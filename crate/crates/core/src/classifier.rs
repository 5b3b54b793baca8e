//! Incremental Gaussian naive Bayes and the test-then-train evaluation step.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::detectors::{DetectorError, DriftMonitor};
use crate::scalar::Scalar;
use crate::stream::{Chunk, Instance};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("feature dimension mismatch: model has {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model has not been trained")]
    NotFitted,
    #[error("chunk is empty")]
    EmptyChunk,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

/// Per-class running moments (Welford).
#[derive(Clone, Debug, PartialEq)]
struct ClassStats<F> {
    count: usize,
    mean: Vec<F>,
    m2: Vec<F>,
}

impl<F: Scalar> ClassStats<F> {
    fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![F::zero(); dim],
            m2: vec![F::zero(); dim],
        }
    }

    fn push(&mut self, x: &[F]) {
        self.count += 1;
        let n = F::from_count(self.count);
        for ((mean, m2), &xi) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let delta = xi - *mean;
            *mean = *mean + delta / n;
            *m2 = *m2 + delta * (xi - *mean);
        }
    }

    fn variance(&self) -> impl Iterator<Item = F> + '_ {
        let n = F::from_count(self.count);
        self.m2.iter().map(move |&m2| m2 / n)
    }
}

pub const DEFAULT_VAR_SMOOTHING: f64 = 1e-9;

/// Gaussian naive Bayes trained one instance at a time.
///
/// Predictions use log-space class scores; each feature variance is floored
/// at `var_smoothing` times the largest per-class feature variance (or times
/// one when every variance is zero). Ties go to the smaller class id.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianNb<F> {
    n_features: Option<usize>,
    classes: BTreeMap<usize, ClassStats<F>>,
    total: usize,
    var_smoothing: F,
}

impl<F: Scalar> Default for GaussianNb<F> {
    fn default() -> Self {
        Self::new(F::lit(DEFAULT_VAR_SMOOTHING))
    }
}

impl<F: Scalar> GaussianNb<F> {
    pub fn new(var_smoothing: F) -> Self {
        Self {
            n_features: None,
            classes: BTreeMap::new(),
            total: 0,
            var_smoothing,
        }
    }

    pub fn is_fitted(&self) -> bool {
        self.total > 0
    }

    pub fn n_features(&self) -> Option<usize> {
        self.n_features
    }

    pub fn n_seen(&self) -> usize {
        self.total
    }

    pub fn var_smoothing(&self) -> F {
        self.var_smoothing
    }

    /// Class ids with at least one training instance, ascending.
    pub fn classes(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes.keys().copied()
    }

    pub fn class_count(&self, class: usize) -> usize {
        self.classes.get(&class).map_or(0, |s| s.count)
    }

    pub fn class_mean(&self, class: usize) -> Option<&[F]> {
        self.classes.get(&class).map(|s| s.mean.as_slice())
    }

    /// Population variance per feature for `class`, before smoothing.
    pub fn class_variance(&self, class: usize) -> Option<Vec<F>> {
        self.classes.get(&class).map(|s| s.variance().collect())
    }

    fn check_dim(&self, found: usize) -> Result<(), ModelError> {
        match self.n_features {
            Some(expected) if expected != found => {
                Err(ModelError::DimensionMismatch { expected, found })
            }
            _ => Ok(()),
        }
    }

    pub fn train_instance(&mut self, instance: &Instance<F>) -> Result<(), ModelError> {
        let dim = instance.features.len();
        self.check_dim(dim)?;
        self.n_features = Some(dim);
        self.classes
            .entry(instance.label)
            .or_insert_with(|| ClassStats::new(dim))
            .push(&instance.features);
        self.total += 1;
        Ok(())
    }

    /// Folds every instance of `chunk` into the running statistics. The
    /// dimension of the whole chunk is checked before any update.
    pub fn train(&mut self, chunk: &Chunk<F>) -> Result<(), ModelError> {
        let dim = match (self.n_features, chunk.n_features()) {
            (_, None) => return Ok(()),
            (Some(d), _) => d,
            (None, Some(d)) => d,
        };
        if let Some(bad) = chunk.instances.iter().find(|i| i.features.len() != dim) {
            return Err(ModelError::DimensionMismatch {
                expected: dim,
                found: bad.features.len(),
            });
        }
        for inst in &chunk.instances {
            self.train_instance(inst)?;
        }
        Ok(())
    }

    /// A brand-new model with the same smoothing, trained only on `chunk`.
    pub fn adapt(&self, chunk: &Chunk<F>) -> Result<Self, ModelError> {
        if chunk.is_empty() {
            return Err(ModelError::EmptyChunk);
        }
        let mut fresh = Self::new(self.var_smoothing);
        fresh.train(chunk)?;
        Ok(fresh)
    }

    fn posterior(&self) -> Result<Posterior<F>, ModelError> {
        if !self.is_fitted() {
            return Err(ModelError::NotFitted);
        }
        let max_var = self
            .classes
            .values()
            .flat_map(|s| s.variance())
            .fold(F::zero(), F::max);
        let floor = self.var_smoothing
            * if max_var > F::zero() {
                max_var
            } else {
                F::one()
            };
        let two_pi = F::lit(2.0) * F::PI();
        let total = F::from_count(self.total);
        let classes = self
            .classes
            .iter()
            .map(|(&label, s)| {
                let var: Vec<F> = s.variance().map(|v| v.max(floor)).collect();
                let log_norm = var
                    .iter()
                    .map(|&v| -(two_pi * v).ln() / F::lit(2.0))
                    .sum::<F>();
                ClassScore {
                    label,
                    log_prior: (F::from_count(s.count) / total).ln() + log_norm,
                    mean: s.mean.clone(),
                    inv_two_var: var.iter().map(|&v| F::one() / (F::lit(2.0) * v)).collect(),
                }
            })
            .collect();
        Ok(Posterior { classes })
    }

    pub fn predict(&self, features: &[F]) -> Result<usize, ModelError> {
        self.check_dim(features.len())?;
        Ok(self.posterior()?.argmax(features))
    }

    /// Number of correctly classified instances in `chunk`.
    pub fn count_correct(&self, chunk: &Chunk<F>) -> Result<usize, ModelError> {
        let post = self.posterior()?;
        let mut correct = 0;
        for inst in &chunk.instances {
            self.check_dim(inst.features.len())?;
            if post.argmax(&inst.features) == inst.label {
                correct += 1;
            }
        }
        Ok(correct)
    }

    /// Fraction of `chunk` classified correctly.
    pub fn accuracy(&self, chunk: &Chunk<F>) -> Result<F, ModelError> {
        if chunk.is_empty() {
            return Err(ModelError::EmptyChunk);
        }
        let correct = self.count_correct(chunk)?;
        Ok(F::from_count(correct) / F::from_count(chunk.len()))
    }
}

struct ClassScore<F> {
    label: usize,
    log_prior: F,
    mean: Vec<F>,
    inv_two_var: Vec<F>,
}

struct Posterior<F> {
    classes: Vec<ClassScore<F>>,
}

impl<F: Scalar> Posterior<F> {
    fn argmax(&self, x: &[F]) -> usize {
        let mut best = (usize::MAX, F::neg_infinity());
        for c in &self.classes {
            let score = c.log_prior
                - x.iter()
                    .zip(&c.mean)
                    .zip(&c.inv_two_var)
                    .map(|((&xi, &mu), &k)| (xi - mu) * (xi - mu) * k)
                    .sum::<F>();
            // Classes iterate in ascending id order; strict `>` keeps the smaller id on ties.
            if best.0 == usize::MAX || score > best.1 {
                best = (c.label, score);
            }
        }
        best.0
    }
}

/// Result of scoring one chunk with a frozen model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOutcome<F> {
    pub accuracy: F,
    /// Detector statistic after consuming this chunk's error rate.
    pub statistic: F,
}

/// Scores `chunk` with `model` (no training), feeds the error rate
/// `1 - accuracy` to `detector` once and reports the new statistic.
pub fn evaluate<F: Scalar>(
    model: &GaussianNb<F>,
    chunk: &Chunk<F>,
    detector: &mut DriftMonitor<F>,
) -> Result<EvalOutcome<F>, EvalError> {
    let accuracy = model.accuracy(chunk)?;
    let statistic = detector.update(F::one() - accuracy)?;
    Ok(EvalOutcome {
        accuracy,
        statistic,
    })
}
