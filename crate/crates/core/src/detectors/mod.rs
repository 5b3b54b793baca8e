//! Drift detectors fed one chunk error rate per update.
//!
//! Every detector is reduced to a non-negative dissimilarity statistic `S_t`
//! and a settable threshold `theta`; an alarm is raised iff `S_t > theta`.
//! Thresholds can be changed at any time without touching the detector's
//! history, which is what dynamic threshold adjustment relies on.

mod ddm;
mod hddm;
mod kswin;
mod page_hinkley;

pub use ddm::Ddm;
pub use hddm::{HddmA, HddmW};
pub use kswin::{ks_distance, Kswin};
pub use page_hinkley::PageHinkley;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("error rate must be a finite value in [0, 1], got {0}")]
    InputOutOfRange(f64),
    #[error("threshold must be finite, got {0}")]
    NonFiniteThreshold(f64),
    #[error("invalid detector parameters: {0}")]
    Params(String),
}

/// Running statistic behind a [`DriftMonitor`].
pub trait Statistic<F> {
    /// Consumes one error rate and returns the updated statistic.
    fn update(&mut self, x: F) -> F;
    /// Forgets all history.
    fn reset(&mut self);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Ddm,
    Ph,
    Kswin,
    HddmA,
    HddmW,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::Ddm,
        DetectorKind::Ph,
        DetectorKind::Kswin,
        DetectorKind::HddmA,
        DetectorKind::HddmW,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Ddm => "ddm",
            DetectorKind::Ph => "ph",
            DetectorKind::Kswin => "kswin",
            DetectorKind::HddmA => "hddm_a",
            DetectorKind::HddmW => "hddm_w",
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = DetectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| DetectorError::Params(format!("unknown detector kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdmParams {
    pub min_samples: usize,
    pub threshold: f64,
}

impl Default for DdmParams {
    fn default() -> Self {
        Self {
            min_samples: 2,
            threshold: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhParams {
    pub delta: f64,
    pub threshold: f64,
}

impl Default for PhParams {
    fn default() -> Self {
        Self {
            delta: 0.005,
            threshold: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KswinParams {
    pub window: usize,
    pub recent: usize,
    pub alpha: f64,
    /// Seed of the sub-sampling generator.
    pub seed: u64,
    /// Overrides `sqrt(-ln(alpha) / recent)` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Default for KswinParams {
    fn default() -> Self {
        Self {
            window: 100,
            recent: 30,
            alpha: 0.005,
            seed: 0,
            threshold: None,
        }
    }
}

impl KswinParams {
    pub fn default_threshold(&self) -> f64 {
        (-self.alpha.ln() / self.recent as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HddmAParams {
    pub alpha: f64,
    pub threshold: f64,
}

impl Default for HddmAParams {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            threshold: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HddmWParams {
    pub lambda: f64,
    pub alpha: f64,
    pub threshold: f64,
}

impl Default for HddmWParams {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            alpha: 0.005,
            threshold: 1.0,
        }
    }
}

/// Parameters for all detector kinds; only the selected kind's block is used.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    pub ddm: DdmParams,
    pub ph: PhParams,
    pub kswin: KswinParams,
    pub hddm_a: HddmAParams,
    pub hddm_w: HddmWParams,
}

impl DetectorParams {
    pub fn default_threshold(&self, kind: DetectorKind) -> f64 {
        match kind {
            DetectorKind::Ddm => self.ddm.threshold,
            DetectorKind::Ph => self.ph.threshold,
            DetectorKind::Kswin => self
                .kswin
                .threshold
                .unwrap_or_else(|| self.kswin.default_threshold()),
            DetectorKind::HddmA => self.hddm_a.threshold,
            DetectorKind::HddmW => self.hddm_w.threshold,
        }
    }

    pub fn validate(&self, kind: DetectorKind) -> Result<(), DetectorError> {
        let bad = |m: &str| Err(DetectorError::Params(m.to_string()));
        let prob = |a: f64| a > 0.0 && a < 1.0;
        match kind {
            DetectorKind::Ddm if self.ddm.min_samples == 0 => {
                bad("ddm.min_samples must be positive")
            }
            DetectorKind::Ph if !(self.ph.delta >= 0.0 && self.ph.delta.is_finite()) => {
                bad("ph.delta must be finite and non-negative")
            }
            DetectorKind::Kswin
                if self.kswin.recent == 0 || self.kswin.recent >= self.kswin.window =>
            {
                bad("kswin requires 0 < recent < window")
            }
            DetectorKind::Kswin if self.kswin.window - self.kswin.recent < self.kswin.recent => {
                bad("kswin requires window - recent >= recent")
            }
            DetectorKind::Kswin if !prob(self.kswin.alpha) => bad("kswin.alpha must lie in (0, 1)"),
            DetectorKind::HddmA if !prob(self.hddm_a.alpha) => {
                bad("hddm_a.alpha must lie in (0, 1)")
            }
            DetectorKind::HddmW if !prob(self.hddm_w.alpha) => {
                bad("hddm_w.alpha must lie in (0, 1)")
            }
            DetectorKind::HddmW if !(self.hddm_w.lambda > 0.0 && self.hddm_w.lambda <= 1.0) => {
                bad("hddm_w.lambda must lie in (0, 1]")
            }
            _ if self.default_threshold(kind).is_nan() => bad("threshold is NaN"),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum State<F> {
    Ddm(Ddm<F>),
    Ph(PageHinkley<F>),
    Kswin(Kswin<F>),
    HddmA(HddmA<F>),
    HddmW(HddmW<F>),
}

impl<F: Scalar> State<F> {
    fn as_statistic(&mut self) -> &mut dyn Statistic<F> {
        match self {
            State::Ddm(d) => d,
            State::Ph(d) => d,
            State::Kswin(d) => d,
            State::HddmA(d) => d,
            State::HddmW(d) => d,
        }
    }
}

/// A detector with an explicit statistic and a mutable threshold.
///
/// `Clone` is a deep copy; clones evolve independently.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftMonitor<F> {
    kind: DetectorKind,
    state: State<F>,
    threshold: F,
    statistic: F,
    last_input: Option<F>,
    n_updates: usize,
}

impl<F: Scalar> DriftMonitor<F> {
    /// Builds a detector of `kind` at its configured default threshold.
    ///
    /// Parameters are assumed valid; see [`DetectorParams::validate`].
    pub fn new(kind: DetectorKind, params: &DetectorParams) -> Self {
        let state = match kind {
            DetectorKind::Ddm => State::Ddm(Ddm::new(params.ddm.min_samples)),
            DetectorKind::Ph => State::Ph(PageHinkley::new(F::lit(params.ph.delta))),
            DetectorKind::Kswin => State::Kswin(Kswin::new(
                params.kswin.window,
                params.kswin.recent,
                params.kswin.seed,
            )),
            DetectorKind::HddmA => State::HddmA(HddmA::new(F::lit(params.hddm_a.alpha))),
            DetectorKind::HddmW => State::HddmW(HddmW::new(
                F::lit(params.hddm_w.lambda),
                F::lit(params.hddm_w.alpha),
            )),
        };
        Self {
            kind,
            state,
            threshold: F::lit(params.default_threshold(kind)),
            statistic: F::zero(),
            last_input: None,
            n_updates: 0,
        }
    }

    /// Replaces the threshold at construction time. Unlike
    /// [`set_threshold`](Self::set_threshold) this accepts `+inf`, which
    /// disables alarms.
    pub fn with_threshold(mut self, threshold: F) -> Self {
        assert!(!threshold.is_nan(), "threshold must not be NaN");
        self.threshold = threshold;
        self
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn threshold(&self) -> F {
        self.threshold
    }

    pub fn set_threshold(&mut self, threshold: F) -> Result<(), DetectorError> {
        if !threshold.is_finite() {
            return Err(DetectorError::NonFiniteThreshold(threshold.to_f64_lossy()));
        }
        self.threshold = threshold;
        Ok(())
    }

    /// Statistic after the most recent update (zero before any).
    pub fn statistic(&self) -> F {
        self.statistic
    }

    pub fn last_input(&self) -> Option<F> {
        self.last_input
    }

    pub fn n_updates(&self) -> usize {
        self.n_updates
    }

    /// `S_t > theta`.
    pub fn alarm(&self) -> bool {
        self.statistic > self.threshold
    }

    pub fn update(&mut self, error_rate: F) -> Result<F, DetectorError> {
        if !(error_rate >= F::zero() && error_rate <= F::one()) {
            return Err(DetectorError::InputOutOfRange(error_rate.to_f64_lossy()));
        }
        let s = self.state.as_statistic().update(error_rate);
        debug_assert!(
            s.is_finite() && s >= F::zero(),
            "statistic {s} out of range"
        );
        self.statistic = s;
        self.last_input = Some(error_rate);
        self.n_updates += 1;
        Ok(s)
    }

    /// Clears history and the statistic; the threshold is kept.
    pub fn reset(&mut self) {
        self.state.as_statistic().reset();
        self.statistic = F::zero();
        self.last_input = None;
        self.n_updates = 0;
    }

    /// A detector of the same kind and parameters with empty history and the
    /// given threshold.
    pub fn fresh(&self, threshold: F) -> Self {
        let mut d = self.clone();
        d.reset();
        d.threshold = threshold;
        d
    }
}
