//! Pillar computations and the global reliability score.
//!
//! All sums go through [`exact_sum`], which returns the correctly rounded value
//! of the exact sum. That makes every mean independent of run order (bit for
//! bit) and monotone in each run score.

use crate::error::ScoringError;
use crate::model::{
    in_unit_interval, EfficiencySource, EvaluationRecord, InterpretabilityMode,
    InterpretabilityRating, MissingGroupPolicy, Note, PerturbationGroup, PillarScores,
    ReliabilityReport, RobustnessSet, ScoreRun, ScoringPolicy, Weights,
};

/// Steps of the parameter-count efficiency scale, highest first.
pub const EFFICIENCY_STEPS: [f64; 6] = [1.0, 0.8, 0.6, 0.4, 0.2, 0.0];

/// Lower bounds (inclusive) of the second through sixth efficiency steps.
const EFFICIENCY_THRESHOLDS: [u64; 5] = [
    10_000_000,
    50_000_000,
    100_000_000,
    300_000_000,
    1_000_000_000,
];

/// Correctly rounded sum of `values` (Shewchuk's algorithm, as in Python's `math.fsum`).
/// Inputs must be finite.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }

    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Round half to even across the remaining partials.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

fn mean_of(runs: &[ScoreRun]) -> Option<f64> {
    if runs.is_empty() {
        None
    } else {
        Some(exact_sum(runs.iter().map(ScoreRun::score)) / runs.len() as f64)
    }
}

/// Mean score over cross-dataset runs.
pub fn transferability(runs: &[ScoreRun]) -> Result<f64, ScoringError> {
    mean_of(runs).ok_or(ScoringError::EmptyRunSet)
}

/// Result of the robustness computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessOutcome {
    pub score: f64,
    /// Per-group means in canonical order; `None` for empty groups.
    pub group_means: [Option<f64>; 3],
    pub notes: Vec<Note>,
}

/// Mean of the per-group means. Groups are averaged first, so a group with many
/// runs weighs the same as a group with one.
pub fn robustness(
    set: &RobustnessSet,
    policy: MissingGroupPolicy,
) -> Result<RobustnessOutcome, ScoringError> {
    let group_means = set.groups().clone().map(|g| mean_of(g.runs()));
    let notes: Vec<Note> = PerturbationGroup::ALL
        .into_iter()
        .filter(|g| group_means[g.index()].is_none())
        .map(|group| Note::EmptyGroup { group })
        .collect();

    let present: Vec<f64> = group_means.iter().flatten().copied().collect();
    let denominator = match policy {
        MissingGroupPolicy::ZeroFill => 3,
        MissingGroupPolicy::Renormalize if present.is_empty() => {
            return Err(ScoringError::AllGroupsEmpty)
        }
        MissingGroupPolicy::Renormalize => present.len(),
    };
    // Zero terms of empty groups do not change the exact sum.
    let score = exact_sum(present.iter().copied()) / denominator as f64;
    Ok(RobustnessOutcome {
        score,
        group_means,
        notes,
    })
}

/// Discrete efficiency score for a parameter count. Lower bounds are inclusive.
pub fn efficiency(param_count: u64) -> f64 {
    let step = EFFICIENCY_THRESHOLDS
        .iter()
        .take_while(|&&t| param_count >= t)
        .count();
    EFFICIENCY_STEPS[step]
}

/// Whether `value` is one of the discrete efficiency steps.
pub fn is_efficiency_step(value: f64) -> bool {
    EFFICIENCY_STEPS.contains(&value)
}

/// Checks an interpretability rating against its band.
pub fn interpretability_check(
    rating: InterpretabilityRating,
    mode: InterpretabilityMode,
) -> Result<(f64, Vec<Note>), ScoringError> {
    let value = rating.value();
    if !in_unit_interval(value) {
        return Err(ScoringError::InvalidValue(value));
    }
    let band = rating.band();
    if band.contains(value) {
        return Ok((value, Vec::new()));
    }
    match mode {
        InterpretabilityMode::Strict => Err(ScoringError::OutOfBand { band, value }),
        InterpretabilityMode::Lenient => {
            Ok((value, vec![Note::InterpretabilityOutOfBand { band, value }]))
        }
    }
}

/// Weighted sum of the four pillars. With [`Weights::EQUAL`] this is the plain mean.
pub fn scg(pillars: &PillarScores, weights: &Weights) -> Result<f64, ScoringError> {
    let values = pillars.values();
    if let Some(&bad) = values.iter().find(|v| !in_unit_interval(**v)) {
        return Err(ScoringError::InvalidScore(bad));
    }
    Ok(weighted_sum(values, weights))
}

fn weighted_sum(values: [f64; 4], weights: &Weights) -> f64 {
    let total = exact_sum(values.iter().zip(weights.values()).map(|(v, w)| v * w));
    // Weights may sum to 1 + 1e-9; keep the score in range.
    total.min(1.0)
}

/// Efficiency pillar value and any note its source implies.
pub fn efficiency_of(source: EfficiencySource) -> (f64, Option<Note>) {
    match source {
        EfficiencySource::ParamCount(p) => (efficiency(p), None),
        EfficiencySource::Override(value) => (
            value,
            Some(Note::EfficiencyOverride {
                value,
                on_scale: is_efficiency_step(value),
            }),
        ),
    }
}

/// Computes all four pillars and the global score of one detector.
pub fn score_detector(
    record: &EvaluationRecord,
    policy: &ScoringPolicy,
) -> Result<ReliabilityReport, ScoringError> {
    let detector = record.detector();
    let annotate = |e: ScoringError| e.for_detector(detector);

    let t = transferability(record.transfer_runs()).map_err(annotate)?;
    let r = robustness(record.robustness(), policy.missing_group).map_err(annotate)?;
    let (i, i_notes) =
        interpretability_check(record.interpretability(), policy.interpretability_mode)
            .map_err(annotate)?;
    let (e, e_note) = efficiency_of(record.efficiency());

    let mut notes = r.notes;
    notes.extend(i_notes);
    notes.extend(e_note);

    let pillars = PillarScores {
        transferability: t,
        robustness: r.score,
        interpretability: i,
        efficiency: e,
        notes,
    };
    let scg = scg(&pillars, &policy.weights).map_err(annotate)?;
    Ok(ReliabilityReport {
        detector: detector.to_string(),
        metric: record.metric(),
        pillars,
        group_means: r.group_means,
        scg,
        policy: *policy,
    })
}

/// Scores every record in order, stopping at the first failure.
pub fn score_all(
    records: &[EvaluationRecord],
    policy: &ScoringPolicy,
) -> Result<Vec<ReliabilityReport>, ScoringError> {
    records.iter().map(|r| score_detector(r, policy)).collect()
}
