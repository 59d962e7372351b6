//! How SCG and rankings move under the framework's discretionary choices:
//! the missing-group policy and the pillar weights.

use serde::Serialize;
use serde_json::json;

use crate::error::ScoringError;
use crate::model::{
    EvaluationRecord, MissingGroupPolicy, ReliabilityReport, ScoringPolicy, Weights,
};
use crate::report::{
    csv_table, json_lines, markdown_table, round_display, DisplayFormat, ReportError,
};
use crate::scoring::{scg, score_all};

/// SCG of one detector under zero-fill and renormalized robustness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyDelta {
    pub detector: String,
    pub scg_zero_fill: f64,
    pub scg_renormalized: f64,
    /// `scg_renormalized - scg_zero_fill`.
    pub delta: f64,
    /// 1-based rank under zero-fill.
    pub rank_before: usize,
    /// 1-based rank under renormalization.
    pub rank_after: usize,
}

/// 1-based ranks by score descending; ties go to the lexicographically smaller name.
pub fn ranks(names: &[&str], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| names[a].cmp(names[b]))
    });
    let mut rank = vec![0; scores.len()];
    for (pos, idx) in order.into_iter().enumerate() {
        rank[idx] = pos + 1;
    }
    rank
}

/// Scores every record under both missing-group policies, keeping the rest of
/// `base_policy`. Fails if a record has no robustness runs at all.
pub fn compare_missing_policies(
    records: &[EvaluationRecord],
    base_policy: &ScoringPolicy,
) -> Result<Vec<PolicyDelta>, ScoringError> {
    let with = |missing_group| ScoringPolicy {
        missing_group,
        ..*base_policy
    };
    let zero = score_all(records, &with(MissingGroupPolicy::ZeroFill))?;
    let renorm = score_all(records, &with(MissingGroupPolicy::Renormalize))?;

    let names: Vec<&str> = records.iter().map(EvaluationRecord::detector).collect();
    let zero_scores: Vec<f64> = zero.iter().map(|r| r.scg).collect();
    let renorm_scores: Vec<f64> = renorm.iter().map(|r| r.scg).collect();
    let before = ranks(&names, &zero_scores);
    let after = ranks(&names, &renorm_scores);

    Ok(names
        .iter()
        .enumerate()
        .map(|(i, name)| PolicyDelta {
            detector: name.to_string(),
            scg_zero_fill: zero_scores[i],
            scg_renormalized: renorm_scores[i],
            delta: renorm_scores[i] - zero_scores[i],
            rank_before: before[i],
            rank_after: after[i],
        })
        .collect())
}

/// SCG and rank of every detector under one weight vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub weights: Weights,
    pub scg: Vec<f64>,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSweep {
    pub detectors: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Recomputes SCG for each weight set from unrounded pillar values. Pillars are
/// computed once under `policy`; its own weights are ignored.
pub fn weight_sweep(
    records: &[EvaluationRecord],
    weight_sets: &[Weights],
    policy: &ScoringPolicy,
) -> Result<WeightSweep, ScoringError> {
    let reports = score_all(records, policy)?;
    sweep_reports(&reports, weight_sets)
}

/// [`weight_sweep`] over already-computed reports.
pub fn sweep_reports(
    reports: &[ReliabilityReport],
    weight_sets: &[Weights],
) -> Result<WeightSweep, ScoringError> {
    let names: Vec<&str> = reports.iter().map(|r| r.detector.as_str()).collect();
    let rows = weight_sets
        .iter()
        .map(|w| {
            let scores = reports
                .iter()
                .map(|r| scg(&r.pillars, w).map_err(|e| e.for_detector(&r.detector)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SweepRow {
                weights: *w,
                ranks: ranks(&names, &scores),
                scg: scores,
            })
        })
        .collect::<Result<Vec<_>, ScoringError>>()?;
    Ok(WeightSweep {
        detectors: names.iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

/// Weight sets used when none are given: equal weights, then each pillar alone.
pub fn default_weight_sets() -> Vec<Weights> {
    let mut sets = vec![Weights::EQUAL];
    for i in 0..4 {
        let mut w = [0.0; 4];
        w[i] = 1.0;
        sets.push(Weights::new(w).expect("unit vectors are valid weights"));
    }
    sets
}

pub fn render_policy_deltas(
    deltas: &[PolicyDelta],
    format: DisplayFormat,
    places: u32,
) -> Result<String, ReportError> {
    if deltas.is_empty() {
        return Err(ReportError::EmptyReportSet);
    }
    if format == DisplayFormat::JsonLines {
        return Ok(json_lines(deltas.iter().map(|d| json!(d))));
    }
    let header: Vec<String> = if format == DisplayFormat::Markdown {
        [
            "Method",
            "SCG zero-fill",
            "SCG renormalized",
            "Delta",
            "Rank before",
            "Rank after",
        ]
    } else {
        [
            "method",
            "scg_zero_fill",
            "scg_renormalized",
            "delta",
            "rank_before",
            "rank_after",
        ]
    }
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = deltas
        .iter()
        .map(|d| {
            vec![
                d.detector.clone(),
                round_display(d.scg_zero_fill, places),
                round_display(d.scg_renormalized, places),
                round_display(d.delta, places),
                d.rank_before.to_string(),
                d.rank_after.to_string(),
            ]
        })
        .collect();
    Ok(match format {
        DisplayFormat::Markdown => markdown_table(&header, &rows),
        _ => csv_table(&header, &rows),
    })
}

/// One row per (weight set, detector).
pub fn render_weight_sweep(
    sweep: &WeightSweep,
    format: DisplayFormat,
    places: u32,
) -> Result<String, ReportError> {
    if sweep.detectors.is_empty() || sweep.rows.is_empty() {
        return Err(ReportError::EmptyReportSet);
    }
    let flat = sweep.rows.iter().flat_map(|row| {
        sweep
            .detectors
            .iter()
            .enumerate()
            .map(move |(i, d)| (row, d, row.scg[i], row.ranks[i]))
    });
    if format == DisplayFormat::JsonLines {
        return Ok(json_lines(flat.map(|(row, d, s, rank)| {
            json!({
                "weights": row.weights,
                "detector": d,
                "scg": s,
                "scg_display": round_display(s, places),
                "rank": rank,
            })
        })));
    }
    let header: Vec<String> = if format == DisplayFormat::Markdown {
        ["Weights (T,R,I,E)", "Method", "SCG", "Rank"]
    } else {
        ["weights", "method", "scg", "rank"]
    }
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = flat
        .map(|(row, d, s, rank)| {
            vec![
                row.weights.to_string(),
                d.clone(),
                round_display(s, places),
                rank.to_string(),
            ]
        })
        .collect();
    Ok(match format {
        DisplayFormat::Markdown => markdown_table(&header, &rows),
        _ => csv_table(&header, &rows),
    })
}
