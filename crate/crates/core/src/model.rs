//! Domain types shared by scoring, ingestion, reporting and sensitivity analysis.
//!
//! Every constructor validates its invariants, so a value of any of these types
//! is always well formed. Fields are private; use the accessors.

use std::fmt;

use serde::Serialize;

use crate::error::ModelError;

/// Metric a detector reports for every test it was evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MetricKind {
    #[serde(rename = "AUC")]
    Auc,
    #[serde(rename = "ACC")]
    Acc,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Auc => "AUC",
            MetricKind::Acc => "ACC",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "AUC" => Some(MetricKind::Auc),
            "ACC" => Some(MetricKind::Acc),
            _ => None,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `true` when `x` is a finite value inside the closed unit interval.
pub(crate) fn in_unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// One experimental result: a label (dataset, perturbation setting, ...) and its score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRun {
    label: String,
    score: f64,
}

impl ScoreRun {
    pub fn new(label: impl Into<String>, score: f64) -> Result<Self, ModelError> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(ModelError::EmptyLabel);
        }
        if !in_unit_interval(score) {
            return Err(ModelError::ScoreOutOfRange { label, score });
        }
        Ok(Self { label, score })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn score(&self) -> f64 {
        self.score
    }
}

/// Perturbation family a robustness test belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationGroup {
    Compression,
    Noise,
    Adversarial,
}

impl PerturbationGroup {
    /// Canonical order used everywhere groups are listed.
    pub const ALL: [PerturbationGroup; 3] = [
        PerturbationGroup::Compression,
        PerturbationGroup::Noise,
        PerturbationGroup::Adversarial,
    ];

    /// Key used in record documents.
    pub fn key(self) -> &'static str {
        match self {
            PerturbationGroup::Compression => "compression",
            PerturbationGroup::Noise => "noise",
            PerturbationGroup::Adversarial => "adversarial",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.key() == key)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PerturbationGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Runs of a single perturbation family. The run list may be empty (untested).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessGroup {
    group: PerturbationGroup,
    runs: Vec<ScoreRun>,
}

impl RobustnessGroup {
    pub fn new(group: PerturbationGroup, runs: Vec<ScoreRun>) -> Self {
        Self { group, runs }
    }

    pub fn empty(group: PerturbationGroup) -> Self {
        Self::new(group, Vec::new())
    }

    pub fn group(&self) -> PerturbationGroup {
        self.group
    }

    pub fn runs(&self) -> &[ScoreRun] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }
}

/// Exactly one [`RobustnessGroup`] per perturbation family, kept in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RobustnessSet {
    groups: [RobustnessGroup; 3],
}

impl RobustnessSet {
    /// Builds the set from groups given in any order. Every tag must appear exactly once.
    pub fn new(groups: Vec<RobustnessGroup>) -> Result<Self, ModelError> {
        let mut slots: [Option<RobustnessGroup>; 3] = [None, None, None];
        for g in groups {
            let slot = &mut slots[g.group.index()];
            if slot.is_some() {
                return Err(ModelError::DuplicateGroup(g.group));
            }
            *slot = Some(g);
        }
        let [c, n, a] = slots;
        let take = |s: Option<RobustnessGroup>, tag| s.ok_or(ModelError::MissingGroup(tag));
        Ok(Self {
            groups: [
                take(c, PerturbationGroup::Compression)?,
                take(n, PerturbationGroup::Noise)?,
                take(a, PerturbationGroup::Adversarial)?,
            ],
        })
    }

    pub fn from_runs(
        compression: Vec<ScoreRun>,
        noise: Vec<ScoreRun>,
        adversarial: Vec<ScoreRun>,
    ) -> Self {
        Self {
            groups: [
                RobustnessGroup::new(PerturbationGroup::Compression, compression),
                RobustnessGroup::new(PerturbationGroup::Noise, noise),
                RobustnessGroup::new(PerturbationGroup::Adversarial, adversarial),
            ],
        }
    }

    pub fn groups(&self) -> &[RobustnessGroup; 3] {
        &self.groups
    }

    pub fn get(&self, group: PerturbationGroup) -> &RobustnessGroup {
        &self.groups[group.index()]
    }

    pub fn has_any_runs(&self) -> bool {
        self.groups.iter().any(|g| !g.is_empty())
    }
}

/// The four qualitative interpretability levels and their admissible value ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpretabilityBand {
    /// Black-box model, no explanation at all. Value must be exactly 0.
    None,
    /// Saliency maps, t-SNE and similar, without critical analysis.
    BasicVisualizations,
    /// Attribute-level explanations (LIME, SHAP).
    InterpretiveAnalyses,
    /// Explanation mechanism built into the model.
    IntegratedExplainability,
}

impl InterpretabilityBand {
    pub const ALL: [InterpretabilityBand; 4] = [
        InterpretabilityBand::None,
        InterpretabilityBand::BasicVisualizations,
        InterpretabilityBand::InterpretiveAnalyses,
        InterpretabilityBand::IntegratedExplainability,
    ];

    /// Closed value range of the band.
    pub fn range(self) -> (f64, f64) {
        match self {
            InterpretabilityBand::None => (0.0, 0.0),
            InterpretabilityBand::BasicVisualizations => (0.3, 0.5),
            InterpretabilityBand::InterpretiveAnalyses => (0.6, 0.8),
            InterpretabilityBand::IntegratedExplainability => (0.9, 1.0),
        }
    }

    pub fn contains(self, value: f64) -> bool {
        let (lo, hi) = self.range();
        lo <= value && value <= hi
    }

    pub fn key(self) -> &'static str {
        match self {
            InterpretabilityBand::None => "none",
            InterpretabilityBand::BasicVisualizations => "basic_visualizations",
            InterpretabilityBand::InterpretiveAnalyses => "interpretive_analyses",
            InterpretabilityBand::IntegratedExplainability => "integrated_explainability",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.key() == key)
    }
}

impl fmt::Display for InterpretabilityBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A manually assigned interpretability rating. The value only has to lie in
/// [0, 1]; whether it sits inside its band is checked at scoring time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpretabilityRating {
    band: InterpretabilityBand,
    value: f64,
}

impl InterpretabilityRating {
    pub fn new(band: InterpretabilityBand, value: f64) -> Result<Self, ModelError> {
        if !in_unit_interval(value) {
            return Err(ModelError::InterpretabilityOutOfRange(value));
        }
        Ok(Self { band, value })
    }

    pub fn band(&self) -> InterpretabilityBand {
        self.band
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// What drives the efficiency pillar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencySource {
    /// Total number of model parameters, mapped through the discrete scale.
    ParamCount(u64),
    /// A pillar value supplied directly, bypassing the parameter-count scale.
    Override(f64),
}

impl EfficiencySource {
    pub fn override_value(value: f64) -> Result<Self, ModelError> {
        if !in_unit_interval(value) {
            return Err(ModelError::OverrideOutOfRange(value));
        }
        Ok(EfficiencySource::Override(value))
    }
}

/// All raw evidence for one detector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationRecord {
    detector: String,
    metric: MetricKind,
    transfer_runs: Vec<ScoreRun>,
    robustness: RobustnessSet,
    interpretability: InterpretabilityRating,
    efficiency: EfficiencySource,
}

impl EvaluationRecord {
    /// Assembles a record from already-validated parts. `transfer_runs` may be
    /// empty; such a record is incomplete and fails to score.
    pub fn new(
        detector: impl Into<String>,
        metric: MetricKind,
        transfer_runs: Vec<ScoreRun>,
        robustness: RobustnessSet,
        interpretability: InterpretabilityRating,
        efficiency: EfficiencySource,
    ) -> Result<Self, ModelError> {
        let detector = detector.into();
        if detector.trim().is_empty() {
            return Err(ModelError::EmptyDetector);
        }
        if let EfficiencySource::Override(v) = efficiency {
            if !in_unit_interval(v) {
                return Err(ModelError::OverrideOutOfRange(v));
            }
        }
        Ok(Self {
            detector,
            metric,
            transfer_runs,
            robustness,
            interpretability,
            efficiency,
        })
    }

    pub fn detector(&self) -> &str {
        &self.detector
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn transfer_runs(&self) -> &[ScoreRun] {
        &self.transfer_runs
    }

    pub fn robustness(&self) -> &RobustnessSet {
        &self.robustness
    }

    pub fn interpretability(&self) -> InterpretabilityRating {
        self.interpretability
    }

    pub fn efficiency(&self) -> EfficiencySource {
        self.efficiency
    }

    /// `false` when there are no cross-dataset runs.
    pub fn is_complete(&self) -> bool {
        !self.transfer_runs.is_empty()
    }
}

/// Pillar identifiers, in the order T, R, I, E used by weight vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Pillar {
    #[serde(rename = "T")]
    Transferability,
    #[serde(rename = "R")]
    Robustness,
    #[serde(rename = "I")]
    Interpretability,
    #[serde(rename = "E")]
    Efficiency,
}

impl Pillar {
    pub const ALL: [Pillar; 4] = [
        Pillar::Transferability,
        Pillar::Robustness,
        Pillar::Interpretability,
        Pillar::Efficiency,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Pillar::Transferability => "T",
            Pillar::Robustness => "R",
            Pillar::Interpretability => "I",
            Pillar::Efficiency => "E",
        }
    }
}

/// Structured warning attached to a pillar computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Note {
    /// A perturbation group had no runs.
    EmptyGroup { group: PerturbationGroup },
    /// E was supplied directly instead of derived from a parameter count.
    /// `on_scale` tells whether the value is one of the discrete scale steps.
    EfficiencyOverride { value: f64, on_scale: bool },
    /// The interpretability value lies outside its band (accepted in lenient mode).
    InterpretabilityOutOfBand {
        band: InterpretabilityBand,
        value: f64,
    },
}

impl Note {
    /// Pillar whose cell this note annotates in a leaderboard, if any.
    pub fn marked_pillar(&self) -> Option<Pillar> {
        match self {
            Note::EmptyGroup { .. } => None,
            Note::EfficiencyOverride { .. } => Some(Pillar::Efficiency),
            Note::InterpretabilityOutOfBand { .. } => Some(Pillar::Interpretability),
        }
    }

    /// Whether the note reports a value the framework's own rules cannot produce.
    pub fn is_discrepancy(&self) -> bool {
        match self {
            Note::EmptyGroup { .. } => false,
            Note::EfficiencyOverride { on_scale, .. } => !on_scale,
            Note::InterpretabilityOutOfBand { .. } => true,
        }
    }
}

impl fmt::Display for Note {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Note::EmptyGroup { group } => write!(f, "{group} group has no runs"),
            Note::EfficiencyOverride {
                value,
                on_scale: true,
            } => {
                write!(f, "efficiency override {value}")
            }
            Note::EfficiencyOverride {
                value,
                on_scale: false,
            } => write!(
                f,
                "efficiency override {value} is not a step of the parameter-count scale"
            ),
            Note::InterpretabilityOutOfBand { band, value } => {
                let (lo, hi) = band.range();
                write!(
                    f,
                    "interpretability {value} outside {band} band [{lo}, {hi}]"
                )
            }
        }
    }
}

/// The four pillar values of one detector plus warnings raised computing them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PillarScores {
    #[serde(rename = "T")]
    pub transferability: f64,
    #[serde(rename = "R")]
    pub robustness: f64,
    #[serde(rename = "I")]
    pub interpretability: f64,
    #[serde(rename = "E")]
    pub efficiency: f64,
    pub notes: Vec<Note>,
}

impl PillarScores {
    pub fn values(&self) -> [f64; 4] {
        [
            self.transferability,
            self.robustness,
            self.interpretability,
            self.efficiency,
        ]
    }

    pub fn get(&self, pillar: Pillar) -> f64 {
        self.values()[pillar as usize]
    }

    pub fn has_marker(&self, pillar: Pillar) -> bool {
        self.notes.iter().any(|n| n.marked_pillar() == Some(pillar))
    }
}

/// How untested perturbation groups enter the robustness mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingGroupPolicy {
    /// An empty group contributes a 0 term to the three-way mean.
    #[default]
    ZeroFill,
    /// Average over the non-empty groups only.
    Renormalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpretabilityMode {
    /// Out-of-band values are errors.
    Strict,
    /// Out-of-band values are accepted with a warning.
    #[default]
    Lenient,
}

/// Tolerance on the sum of a weight vector.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Non-negative pillar weights (T, R, I, E) summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Weights([f64; 4]);

impl Weights {
    pub const EQUAL: Weights = Weights([0.25; 4]);

    pub fn new(values: [f64; 4]) -> Result<Self, ModelError> {
        if let Some(&w) = values.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(ModelError::BadWeights(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ModelError::BadWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self(values))
    }

    /// Parses a comma-separated list of four numbers.
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(ModelError::BadWeights(format!(
                "expected 4 comma-separated weights, got {}",
                parts.len()
            )));
        }
        let mut values = [0.0; 4];
        for (slot, part) in values.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| ModelError::BadWeights(format!("{part:?} is not a number")))?;
        }
        Self::new(values)
    }

    pub fn values(&self) -> [f64; 4] {
        self.0
    }

    pub fn is_equal(&self) -> bool {
        *self == Self::EQUAL
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self::EQUAL
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [t, r, i, e] = self.0;
        write!(f, "{t},{r},{i},{e}")
    }
}

/// Every discretionary choice that affects scores or their display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoringPolicy {
    pub missing_group: MissingGroupPolicy,
    pub weights: Weights,
    pub interpretability_mode: InterpretabilityMode,
    /// Decimal places used when values are displayed (half-up).
    pub rounding: u32,
}

impl Default for ScoringPolicy {
    fn default() -> Self {
        Self {
            missing_group: MissingGroupPolicy::ZeroFill,
            weights: Weights::EQUAL,
            interpretability_mode: InterpretabilityMode::Lenient,
            rounding: 2,
        }
    }
}

/// Scores of one detector under a recorded policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityReport {
    pub detector: String,
    pub metric: MetricKind,
    pub pillars: PillarScores,
    /// Mean of each perturbation group (compression, noise, adversarial); `None` when empty.
    pub group_means: [Option<f64>; 3],
    pub scg: f64,
    pub policy: ScoringPolicy,
}
