//! Reliability scoring for deepfake detectors.
//!
//! A detector is assessed on four pillars, each in [0, 1]:
//!
//! - transferability (T): mean score over cross-dataset tests;
//! - robustness (R): mean of the per-group means over compression, noise and
//!   adversarial tests;
//! - interpretability (I): a manual rating checked against four bands;
//! - efficiency (E): a step function of the model's parameter count.
//!
//! The global reliability score (SCG) is their weighted mean, equal weights by
//! default. [`scoring::score_detector`] turns an [`model::EvaluationRecord`]
//! into a [`model::ReliabilityReport`]; [`report`] renders reports as tables,
//! [`sensitivity`] measures how rankings move under other policies, and
//! [`golden`] holds the embedded reference dataset.

pub mod cli;
pub mod error;
pub mod golden;
pub mod ingest;
pub mod model;
pub mod report;
pub mod scoring;
pub mod sensitivity;

pub use error::{IngestError, ModelError, ScoringError};
pub use model::{
    EfficiencySource, EvaluationRecord, InterpretabilityBand, InterpretabilityMode,
    InterpretabilityRating, MetricKind, MissingGroupPolicy, Note, PerturbationGroup, Pillar,
    PillarScores, ReliabilityReport, RobustnessGroup, RobustnessSet, ScoreRun, ScoringPolicy,
    Weights,
};
