//! Drift detection with dynamically determined thresholds.
//!
//! The core types are generic over the scalar type (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the harness uses.

pub mod classifier;
pub mod detectors;
pub mod dtd;
pub mod harness;
pub mod scalar;
pub mod stream;
pub mod theory;

pub use classifier::{evaluate, EvalError, EvalOutcome, GaussianNb, ModelError};
pub use detectors::{DetectorError, DetectorKind, DetectorParams, DriftMonitor};
pub use dtd::{
    create_candidates, eval_candidates, finalize_comparison, CandidateKind, CandidateSet, DtdError,
    DtdSettings, DtdState, Phase, StepEvent, StepReport, TrainingMode, Work,
};
pub use scalar::Scalar;
pub use stream::{Chunk, GeneratorKind, Instance, Stream, StreamConfig, StreamError};

pub type Model = GaussianNb<f64>;
pub type Detector = DriftMonitor<f64>;
pub type Dtd = DtdState<f64>;
pub type DataStream = Stream<f64>;
pub type DataChunk = Chunk<f64>;

pub type Model32 = GaussianNb<f32>;
pub type Detector32 = DriftMonitor<f32>;
pub type Dtd32 = DtdState<f32>;
pub type DataStream32 = Stream<f32>;
