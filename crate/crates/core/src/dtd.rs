//! Dynamic threshold determination.
//!
//! On every alarm of the primary detector the wrapper races three candidate
//! models for `K` chunks instead of adapting immediately:
//!
//! * **EDM** assumes the drift already happened one chunk earlier. It is
//!   rebuilt from the previous chunk and watched by a fresh detector whose
//!   threshold is the previous statistic `S_{t-1}`.
//! * **RDM** assumes the alarm was on time. It is rebuilt from the alarm chunk
//!   and keeps the primary detector (history cleared) and its threshold.
//! * **PM** assumes a false alarm. It keeps the primary model and a fresh
//!   detector with threshold `S_t + eta`.
//!
//! The candidate with the best mean accuracy over the race (seed entry
//! included) becomes the new primary model, and its detector, threshold
//! included, becomes the new primary detector.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{evaluate, EvalError, GaussianNb, ModelError};
use crate::detectors::DriftMonitor;
use crate::scalar::Scalar;
use crate::stream::Chunk;

#[derive(Debug, Error, PartialEq)]
pub enum DtdError {
    #[error("alarm raised without a previous chunk; no early-drift candidate can be built")]
    NoPreviousChunk,
    #[error("candidates can only be built right after an alarm (statistic {statistic} <= threshold {threshold})")]
    NoAlarm { statistic: f64, threshold: f64 },
    #[error("no comparison phase is active")]
    InactivePhase,
    #[error("candidate {0:?} has an empty accuracy log")]
    EmptyLog(CandidateKind),
    #[error("invalid settings: {0}")]
    Settings(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<ModelError> for DtdError {
    fn from(e: ModelError) -> Self {
        DtdError::Eval(EvalError::Model(e))
    }
}

/// The three drift hypotheses. Ordering `Edm < Rdm < Pm` fixes iteration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CandidateKind {
    Edm,
    Rdm,
    Pm,
}

impl CandidateKind {
    pub const ALL: [CandidateKind; 3] = [CandidateKind::Edm, CandidateKind::Rdm, CandidateKind::Pm];

    /// Tie-break rank, higher wins: RDM > PM > EDM.
    fn priority(self) -> u8 {
        match self {
            CandidateKind::Rdm => 2,
            CandidateKind::Pm => 1,
            CandidateKind::Edm => 0,
        }
    }
}

/// Kind with the largest score; ties resolved by [`CandidateKind::priority`].
pub fn best_candidate<F: Scalar>(
    scores: impl IntoIterator<Item = (CandidateKind, F)>,
) -> CandidateKind {
    scores
        .into_iter()
        .fold(None::<(CandidateKind, F)>, |best, (k, s)| match best {
            Some((bk, bs)) if bs > s || (bs == s && bk.priority() > k.priority()) => Some((bk, bs)),
            _ => Some((k, s)),
        })
        .map(|(k, _)| k)
        .expect("at least one candidate")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    /// Train on every chunk after it has been evaluated.
    Continual,
    /// Only (re)train on drift adaptation.
    Sporadic,
}

impl TrainingMode {
    pub fn is_continual(self) -> bool {
        matches!(self, TrainingMode::Continual)
    }
}

/// Instance-level work counters: predictions made and instances trained on
/// (adaptation included).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Work {
    pub predicted: usize,
    pub trained: usize,
}

impl Work {
    pub fn total(&self) -> usize {
        self.predicted + self.trained
    }
}

impl std::ops::Sub for Work {
    type Output = Work;

    fn sub(self, rhs: Work) -> Work {
        Work {
            predicted: self.predicted - rhs.predicted,
            trained: self.trained - rhs.trained,
        }
    }
}

fn eval_counted<F: Scalar>(
    model: &GaussianNb<F>,
    chunk: &Chunk<F>,
    detector: &mut DriftMonitor<F>,
    work: &mut Work,
) -> Result<crate::classifier::EvalOutcome<F>, DtdError> {
    work.predicted += chunk.len();
    Ok(evaluate(model, chunk, detector)?)
}

fn train_counted<F: Scalar>(
    model: &mut GaussianNb<F>,
    chunk: &Chunk<F>,
    work: &mut Work,
) -> Result<(), DtdError> {
    work.trained += chunk.len();
    Ok(model.train(chunk)?)
}

fn adapt_counted<F: Scalar>(
    model: &GaussianNb<F>,
    chunk: &Chunk<F>,
    work: &mut Work,
) -> Result<GaussianNb<F>, DtdError> {
    work.trained += chunk.len();
    Ok(model.adapt(chunk)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate<F> {
    pub model: GaussianNb<F>,
    pub detector: DriftMonitor<F>,
    pub accuracies: Vec<F>,
}

impl<F: Scalar> Candidate<F> {
    pub fn mean_accuracy(&self) -> Option<F> {
        crate::scalar::mean(&self.accuracies)
    }
}

/// One model, detector and accuracy log per hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet<F> {
    pub edm: Candidate<F>,
    pub rdm: Candidate<F>,
    pub pm: Candidate<F>,
}

impl<F> CandidateSet<F> {
    pub fn get(&self, kind: CandidateKind) -> &Candidate<F> {
        match kind {
            CandidateKind::Edm => &self.edm,
            CandidateKind::Rdm => &self.rdm,
            CandidateKind::Pm => &self.pm,
        }
    }

    pub fn get_mut(&mut self, kind: CandidateKind) -> &mut Candidate<F> {
        match kind {
            CandidateKind::Edm => &mut self.edm,
            CandidateKind::Rdm => &mut self.rdm,
            CandidateKind::Pm => &mut self.pm,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (CandidateKind, &Candidate<F>)> {
        CandidateKind::ALL
            .into_iter()
            .map(move |k| (k, self.get(k)))
    }
}

/// What the primary loop knows at the moment of an alarm.
#[derive(Clone, Copy, Debug)]
pub struct AlarmContext<'a, F> {
    pub model: &'a GaussianNb<F>,
    pub last_model: &'a GaussianNb<F>,
    pub current: &'a Chunk<F>,
    pub previous: Option<&'a Chunk<F>>,
    pub accuracy: F,
    pub statistic: F,
    pub prev_statistic: F,
    pub detector: &'a DriftMonitor<F>,
}

/// Builds the three hypotheses after an alarm on `ctx.current`.
pub fn create_candidates<F: Scalar>(
    ctx: AlarmContext<'_, F>,
    mode: TrainingMode,
    eta: F,
    work: &mut Work,
) -> Result<CandidateSet<F>, DtdError> {
    if !(ctx.statistic > ctx.detector.threshold()) {
        return Err(DtdError::NoAlarm {
            statistic: ctx.statistic.to_f64_lossy(),
            threshold: ctx.detector.threshold().to_f64_lossy(),
        });
    }
    let previous = ctx.previous.ok_or(DtdError::NoPreviousChunk)?;
    let current = ctx.current;

    let mut rdm_detector = ctx.detector.clone();
    rdm_detector.reset();
    let rdm = Candidate {
        model: adapt_counted(ctx.model, current, work)?,
        detector: rdm_detector,
        accuracies: vec![ctx.accuracy],
    };

    let mut edm_model = adapt_counted(ctx.last_model, previous, work)?;
    let mut edm_detector = ctx.detector.fresh(ctx.prev_statistic);
    let out = eval_counted(&edm_model, current, &mut edm_detector, work)?;
    if out.statistic > ctx.prev_statistic {
        edm_model = adapt_counted(&edm_model, current, work)?;
        edm_detector.reset();
    } else if mode.is_continual() {
        train_counted(&mut edm_model, current, work)?;
    }
    let edm = Candidate {
        model: edm_model,
        detector: edm_detector,
        accuracies: vec![out.accuracy],
    };

    let mut pm_model = ctx.model.clone();
    if mode.is_continual() {
        train_counted(&mut pm_model, current, work)?;
    }
    let pm = Candidate {
        model: pm_model,
        detector: ctx.detector.fresh(ctx.statistic + eta),
        accuracies: vec![ctx.accuracy],
    };

    Ok(CandidateSet { edm, rdm, pm })
}

/// Scores every candidate on `chunk`, logs its accuracy, then adapts it if
/// its own detector alarms or otherwise trains it under continual mode.
pub fn eval_candidates<F: Scalar>(
    candidates: &mut CandidateSet<F>,
    chunk: &Chunk<F>,
    mode: TrainingMode,
    work: &mut Work,
) -> Result<BTreeMap<CandidateKind, F>, DtdError> {
    let mut step = BTreeMap::new();
    for kind in CandidateKind::ALL {
        let cand = candidates.get_mut(kind);
        let out = eval_counted(&cand.model, chunk, &mut cand.detector, work)?;
        cand.accuracies.push(out.accuracy);
        step.insert(kind, out.accuracy);
        if cand.detector.alarm() {
            cand.model = adapt_counted(&cand.model, chunk, work)?;
            cand.detector.reset();
        } else if mode.is_continual() {
            train_counted(&mut cand.model, chunk, work)?;
        }
    }
    Ok(step)
}

/// Picks the candidate with the highest mean logged accuracy and hands back
/// its model and detector.
pub fn finalize_comparison<F: Scalar>(
    candidates: CandidateSet<F>,
) -> Result<(CandidateKind, GaussianNb<F>, DriftMonitor<F>), DtdError> {
    let mut means = Vec::with_capacity(3);
    for (kind, cand) in candidates.iter() {
        means.push((kind, cand.mean_accuracy().ok_or(DtdError::EmptyLog(kind))?));
    }
    let winner = best_candidate(means);
    let Candidate {
        model, detector, ..
    } = match winner {
        CandidateKind::Edm => candidates.edm,
        CandidateKind::Rdm => candidates.rdm,
        CandidateKind::Pm => candidates.pm,
    };
    Ok((winner, model, detector))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtdSettings<F> {
    /// Comparison length in chunks.
    pub k: usize,
    /// Margin added to the alarm statistic when the false-alarm hypothesis wins.
    pub eta: F,
    pub mode: TrainingMode,
}

impl<F: Scalar> DtdSettings<F> {
    pub fn new(mode: TrainingMode) -> Self {
        Self {
            k: 3,
            eta: F::lit(1e-6),
            mode,
        }
    }

    pub fn validate(&self) -> Result<(), DtdError> {
        if self.k == 0 {
            return Err(DtdError::Settings("k must be at least 1".into()));
        }
        if !(self.eta > F::zero() && self.eta.is_finite()) {
            return Err(DtdError::Settings(
                "eta must be a finite positive value".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Comparison<F> {
    candidates: CandidateSet<F>,
    remaining: usize,
    leader: CandidateKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Normal,
    Comparison,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepEvent {
    /// Alarm with a previous chunk: a comparison phase started.
    PhaseStarted,
    /// Alarm without a previous chunk: the model was adapted directly.
    ImmediateAdaptation,
    /// Comparison finished; the winner was installed.
    Finalized(CandidateKind),
}

/// Outcome of one [`DtdState::step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport<F> {
    /// Accuracy credited to this chunk.
    pub accuracy: F,
    /// Primary statistic in the normal phase; the reported leader's
    /// statistic during comparison.
    pub statistic: F,
    /// Primary threshold after the step.
    pub threshold: F,
    /// The primary detector alarmed on this chunk.
    pub alarm: bool,
    /// Phase the chunk was processed in.
    pub phase: Phase,
    pub event: Option<StepEvent>,
    /// Work spent on this chunk.
    pub work: Work,
}

/// Primary model, detector and comparison bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct DtdState<F> {
    model: GaussianNb<F>,
    last_model: GaussianNb<F>,
    detector: DriftMonitor<F>,
    settings: DtdSettings<F>,
    comparison: Option<Comparison<F>>,
    prev_statistic: F,
    prev_chunk: Option<Chunk<F>>,
    work: Work,
}

impl<F: Scalar> DtdState<F> {
    pub fn new(
        model: GaussianNb<F>,
        detector: DriftMonitor<F>,
        settings: DtdSettings<F>,
    ) -> Result<Self, DtdError> {
        settings.validate()?;
        Ok(Self {
            last_model: model.clone(),
            model,
            detector,
            settings,
            comparison: None,
            prev_statistic: F::zero(),
            prev_chunk: None,
            work: Work::default(),
        })
    }

    /// Trains the primary model on `chunk` without evaluating it and remembers
    /// it as the previous chunk.
    pub fn warm_up(&mut self, chunk: &Chunk<F>) -> Result<(), DtdError> {
        train_counted(&mut self.model, chunk, &mut self.work)?;
        self.last_model = self.model.clone();
        self.prev_chunk = Some(chunk.clone());
        Ok(())
    }

    pub fn model(&self) -> &GaussianNb<F> {
        &self.model
    }

    pub fn last_model(&self) -> &GaussianNb<F> {
        &self.last_model
    }

    pub fn detector(&self) -> &DriftMonitor<F> {
        &self.detector
    }

    pub fn detector_mut(&mut self) -> &mut DriftMonitor<F> {
        &mut self.detector
    }

    pub fn threshold(&self) -> F {
        self.detector.threshold()
    }

    pub fn settings(&self) -> &DtdSettings<F> {
        &self.settings
    }

    pub fn in_comparison(&self) -> bool {
        self.comparison.is_some()
    }

    /// Comparison chunks left, zero in the normal phase.
    pub fn remaining(&self) -> usize {
        self.comparison.as_ref().map_or(0, |c| c.remaining)
    }

    pub fn leader(&self) -> CandidateKind {
        self.comparison
            .as_ref()
            .map_or(CandidateKind::Rdm, |c| c.leader)
    }

    pub fn candidates(&self) -> Option<&CandidateSet<F>> {
        self.comparison.as_ref().map(|c| &c.candidates)
    }

    pub fn prev_statistic(&self) -> F {
        self.prev_statistic
    }

    /// Cumulative work since construction.
    pub fn work(&self) -> Work {
        self.work
    }

    /// Runs [`eval_candidates`] on the active comparison phase without
    /// advancing the countdown.
    pub fn eval_candidates(
        &mut self,
        chunk: &Chunk<F>,
    ) -> Result<BTreeMap<CandidateKind, F>, DtdError> {
        let mode = self.settings.mode;
        let cmp = self.comparison.as_mut().ok_or(DtdError::InactivePhase)?;
        eval_candidates(&mut cmp.candidates, chunk, mode, &mut self.work)
    }

    /// Processes one chunk and reports the accuracy credited to it.
    pub fn step(&mut self, chunk: &Chunk<F>) -> Result<StepReport<F>, DtdError> {
        let before = self.work;
        let mut report = if self.comparison.is_some() {
            self.comparison_step(chunk)?
        } else {
            self.normal_step(chunk)?
        };
        self.prev_chunk = Some(chunk.clone());
        report.threshold = self.detector.threshold();
        report.work = self.work - before;
        Ok(report)
    }

    fn normal_step(&mut self, chunk: &Chunk<F>) -> Result<StepReport<F>, DtdError> {
        let out = eval_counted(&self.model, chunk, &mut self.detector, &mut self.work)?;
        let alarm = self.detector.alarm();
        let mut event = None;
        if alarm {
            if self.prev_chunk.is_some() {
                let candidates = create_candidates(
                    AlarmContext {
                        model: &self.model,
                        last_model: &self.last_model,
                        current: chunk,
                        previous: self.prev_chunk.as_ref(),
                        accuracy: out.accuracy,
                        statistic: out.statistic,
                        prev_statistic: self.prev_statistic,
                        detector: &self.detector,
                    },
                    self.settings.mode,
                    self.settings.eta,
                    &mut self.work,
                )?;
                self.comparison = Some(Comparison {
                    candidates,
                    remaining: self.settings.k,
                    leader: CandidateKind::Rdm,
                });
                event = Some(StepEvent::PhaseStarted);
            } else {
                self.model = adapt_counted(&self.model, chunk, &mut self.work)?;
                self.detector.reset();
                event = Some(StepEvent::ImmediateAdaptation);
            }
        }
        self.last_model = self.model.clone();
        if self.settings.mode.is_continual() && event != Some(StepEvent::ImmediateAdaptation) {
            train_counted(&mut self.model, chunk, &mut self.work)?;
        }
        self.prev_statistic = out.statistic;
        Ok(StepReport {
            accuracy: out.accuracy,
            statistic: out.statistic,
            threshold: self.detector.threshold(),
            alarm,
            phase: Phase::Normal,
            event,
            work: Work::default(),
        })
    }

    fn comparison_step(&mut self, chunk: &Chunk<F>) -> Result<StepReport<F>, DtdError> {
        let mode = self.settings.mode;
        let cmp = self.comparison.as_mut().ok_or(DtdError::InactivePhase)?;
        let step = eval_candidates(&mut cmp.candidates, chunk, mode, &mut self.work)?;
        cmp.remaining -= 1;
        let reported = cmp.leader;
        let accuracy = step[&reported];
        let statistic = cmp.candidates.get(reported).detector.statistic();
        cmp.leader = best_candidate(step.iter().map(|(&k, &a)| (k, a)));

        let mut event = None;
        if cmp.remaining == 0 {
            let cmp = self.comparison.take().expect("active");
            let (winner, model, detector) = finalize_comparison(cmp.candidates)?;
            self.model = model;
            self.last_model = self.model.clone();
            self.detector = detector;
            self.prev_statistic = self.detector.statistic();
            event = Some(StepEvent::Finalized(winner));
        }
        Ok(StepReport {
            accuracy,
            statistic,
            threshold: self.detector.threshold(),
            alarm: false,
            phase: Phase::Comparison,
            event,
            work: Work::default(),
        })
    }
}
