use thiserror::Error;

use crate::ingest::ValidationIssue;
use crate::model::{InterpretabilityBand, PerturbationGroup};

/// A domain value failed its construction invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("run label must not be empty")]
    EmptyLabel,
    #[error("score {score} of run {label:?} is outside [0, 1]")]
    ScoreOutOfRange { label: String, score: f64 },
    #[error("detector name must not be empty")]
    EmptyDetector,
    #[error("robustness group {0} given more than once")]
    DuplicateGroup(PerturbationGroup),
    #[error("robustness group {0} is missing")]
    MissingGroup(PerturbationGroup),
    #[error("interpretability value {0} is outside [0, 1]")]
    InterpretabilityOutOfRange(f64),
    #[error("efficiency override {0} is outside [0, 1]")]
    OverrideOutOfRange(f64),
    #[error("bad weights: {0}")]
    BadWeights(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("EmptyRunSet: no cross-dataset runs to average")]
    EmptyRunSet,
    #[error("AllGroupsEmpty: every robustness group is empty, nothing to renormalize over")]
    AllGroupsEmpty,
    #[error("InvalidScore: {0} is outside [0, 1]")]
    InvalidScore(f64),
    #[error("InvalidValue: interpretability {0} is outside [0, 1]")]
    InvalidValue(f64),
    #[error("OutOfBand: interpretability {value} outside {band} band [{lo}, {hi}]", lo = band.range().0, hi = band.range().1)]
    OutOfBand {
        band: InterpretabilityBand,
        value: f64,
    },
    #[error("BadWeights: {0}")]
    BadWeights(String),
    #[error("detector {detector}: {source}")]
    Detector {
        detector: String,
        #[source]
        source: Box<ScoringError>,
    },
}

impl ScoringError {
    pub(crate) fn for_detector(self, detector: &str) -> Self {
        ScoringError::Detector {
            detector: detector.to_string(),
            source: Box::new(self),
        }
    }

    /// The error with any detector annotation stripped.
    pub fn root(&self) -> &ScoringError {
        match self {
            ScoringError::Detector { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Why a record document was rejected. Every variant carries at least one issue
/// whose path points at the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("SyntaxError: {}", first_message(.0))]
    Syntax(Vec<ValidationIssue>),
    #[error("SchemaError: {}", first_message(.0))]
    Schema(Vec<ValidationIssue>),
    #[error("RangeError: {}", first_message(.0))]
    Range(Vec<ValidationIssue>),
    #[error("ConflictError: {}", first_message(.0))]
    Conflict(Vec<ValidationIssue>),
    #[error("DuplicateDetector: {name:?} appears in documents {first} and {second}")]
    DuplicateDetector {
        name: String,
        first: usize,
        second: usize,
        issues: Vec<ValidationIssue>,
    },
    #[error("document {index}: {source}")]
    Document {
        index: usize,
        #[source]
        source: Box<IngestError>,
    },
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<IngestError>,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn first_message(issues: &[ValidationIssue]) -> String {
    match issues {
        [] => "invalid document".to_string(),
        [one] => one.to_string(),
        [one, rest @ ..] => format!("{one} (and {} more)", rest.len()),
    }
}

impl IngestError {
    pub fn issues(&self) -> Vec<ValidationIssue> {
        match self {
            IngestError::Syntax(v)
            | IngestError::Schema(v)
            | IngestError::Range(v)
            | IngestError::Conflict(v) => v.clone(),
            IngestError::DuplicateDetector { issues, .. } => issues.clone(),
            IngestError::Document { source, .. } | IngestError::File { source, .. } => {
                source.issues()
            }
            IngestError::Io { path, message } => {
                vec![ValidationIssue::error("", format!("{path}: {message}"))]
            }
        }
    }

    /// The error with document-index and file annotations stripped.
    pub fn root(&self) -> &IngestError {
        match self {
            IngestError::Document { source, .. } | IngestError::File { source, .. } => {
                source.root()
            }
            other => other,
        }
    }

    /// Short name of the error category.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            IngestError::Syntax(_) => "SyntaxError",
            IngestError::Schema(_) => "SchemaError",
            IngestError::Range(_) => "RangeError",
            IngestError::Conflict(_) => "ConflictError",
            IngestError::DuplicateDetector { .. } => "DuplicateDetector",
            IngestError::Io { .. } => "IoError",
            IngestError::Document { .. } | IngestError::File { .. } => {
                unreachable!("root strips wrappers")
            }
        }
    }
}
