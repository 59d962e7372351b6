//! Record generators and a naive reference implementation of the scoring rules.
//!
//! The oracle deliberately uses plain left-to-right loops and explicit
//! comparisons, sharing no code with the library's scoring path.

#![allow(dead_code)]

use detector_reliability::{
    EfficiencySource, EvaluationRecord, InterpretabilityBand, InterpretabilityRating, MetricKind,
    MissingGroupPolicy, RobustnessSet, ScoreRun, Weights,
};
use proptest::prelude::*;

pub fn score() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        1 => Just(1.0),
        8 => 0.0f64..=1.0,
    ]
}

pub fn runs(min: usize, max: usize) -> impl Strategy<Value = Vec<ScoreRun>> {
    prop::collection::vec(score(), min..=max).prop_map(|scores| {
        scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| ScoreRun::new(format!("run-{i}"), s).unwrap())
            .collect()
    })
}

pub fn band() -> impl Strategy<Value = InterpretabilityBand> {
    prop::sample::select(InterpretabilityBand::ALL.to_vec())
}

pub fn param_count() -> impl Strategy<Value = u64> {
    prop_oneof![
        2 => 0u64..2_000_000_000,
        1 => prop::sample::select(vec![
            0,
            9_999_999,
            10_000_000,
            49_999_999,
            50_000_000,
            99_999_999,
            100_000_000,
            299_999_999,
            300_000_000,
            999_999_999,
            1_000_000_000,
            u64::MAX,
        ]),
    ]
}

pub fn efficiency_source() -> impl Strategy<Value = EfficiencySource> {
    prop_oneof![
        3 => param_count().prop_map(EfficiencySource::ParamCount),
        1 => score().prop_map(EfficiencySource::Override),
    ]
}

pub fn detector_name() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9 _.-]{0,15}".prop_filter("non-blank", |s| !s.trim().is_empty())
}

/// Records with at least one transfer run and at least one non-empty robustness group.
pub fn record() -> impl Strategy<Value = EvaluationRecord> {
    (
        detector_name(),
        prop::sample::select(vec![MetricKind::Auc, MetricKind::Acc]),
        runs(1, 8),
        runs(0, 5),
        runs(0, 5),
        runs(0, 5),
        band(),
        score(),
        efficiency_source(),
    )
        .prop_filter("at least one robustness run", |(_, _, _, c, n, a, ..)| {
            !(c.is_empty() && n.is_empty() && a.is_empty())
        })
        .prop_map(|(name, metric, transfer, c, n, a, band, value, eff)| {
            EvaluationRecord::new(
                name,
                metric,
                transfer,
                RobustnessSet::from_runs(c, n, a),
                InterpretabilityRating::new(band, value).unwrap(),
                eff,
            )
            .unwrap()
        })
}

pub fn weights() -> impl Strategy<Value = Weights> {
    prop_oneof![
        1 => Just(Weights::EQUAL),
        3 => prop::array::uniform4(0.0f64..1.0)
            .prop_filter("non-zero", |w| w.iter().sum::<f64>() > 1e-6)
            .prop_map(|w| {
                let s: f64 = w.iter().sum();
                let mut v = w.map(|x| x / s);
                // Push the residual into the last weight so the sum is 1 to within rounding.
                v[3] = (1.0 - v[0] - v[1] - v[2]).max(0.0);
                Weights::new(v).unwrap()
            }),
    ]
}

/// Naive pillar values and SCG.
#[derive(Debug, Clone, Copy)]
pub struct OracleScores {
    pub t: f64,
    pub r: f64,
    pub i: f64,
    pub e: f64,
    pub scg: f64,
}

fn naive_mean(values: &[f64]) -> f64 {
    let mut total = 0.0;
    for v in values {
        total += v;
    }
    total / values.len() as f64
}

pub fn naive_efficiency(p: u64) -> f64 {
    if p < 10_000_000 {
        1.0
    } else if p < 50_000_000 {
        0.8
    } else if p < 100_000_000 {
        0.6
    } else if p < 300_000_000 {
        0.4
    } else if p < 1_000_000_000 {
        0.2
    } else {
        0.0
    }
}

/// Recomputes everything from the record's raw numbers. Interpretability is
/// taken as-is (lenient mode).
pub fn oracle(
    record: &EvaluationRecord,
    missing: MissingGroupPolicy,
    weights: &Weights,
) -> OracleScores {
    let transfer: Vec<f64> = record.transfer_runs().iter().map(|r| r.score()).collect();
    let t = naive_mean(&transfer);

    let mut group_total = 0.0;
    let mut tested = 0;
    for g in record.robustness().groups() {
        let scores: Vec<f64> = g.runs().iter().map(|r| r.score()).collect();
        if !scores.is_empty() {
            group_total += naive_mean(&scores);
            tested += 1;
        }
    }
    let r = match missing {
        MissingGroupPolicy::ZeroFill => group_total / 3.0,
        MissingGroupPolicy::Renormalize => group_total / tested as f64,
    };

    let i = record.interpretability().value();
    let e = match record.efficiency() {
        EfficiencySource::ParamCount(p) => naive_efficiency(p),
        EfficiencySource::Override(v) => v,
    };
    let w = weights.values();
    let scg = w[0] * t + w[1] * r + w[2] * i + w[3] * e;
    OracleScores { t, r, i, e, scg }
}

/// Rebuilds `record` with one run score replaced. `slot` 0 addresses transfer
/// runs, 1..=3 the robustness groups in canonical order.
pub fn with_score(
    record: &EvaluationRecord,
    slot: usize,
    index: usize,
    score: f64,
) -> EvaluationRecord {
    let replace = |runs: &[ScoreRun], hit: bool| -> Vec<ScoreRun> {
        runs.iter()
            .enumerate()
            .map(|(i, r)| {
                if hit && i == index {
                    ScoreRun::new(r.label(), score).unwrap()
                } else {
                    r.clone()
                }
            })
            .collect()
    };
    let groups = record.robustness().groups();
    EvaluationRecord::new(
        record.detector(),
        record.metric(),
        replace(record.transfer_runs(), slot == 0),
        RobustnessSet::from_runs(
            replace(groups[0].runs(), slot == 1),
            replace(groups[1].runs(), slot == 2),
            replace(groups[2].runs(), slot == 3),
        ),
        record.interpretability(),
        record.efficiency(),
    )
    .unwrap()
}

/// Rebuilds `record` with every run list reversed and rotated.
pub fn permuted(record: &EvaluationRecord, rotate: usize) -> EvaluationRecord {
    let shuffle = |runs: &[ScoreRun]| -> Vec<ScoreRun> {
        let mut v: Vec<ScoreRun> = runs.iter().rev().cloned().collect();
        if !v.is_empty() {
            let k = rotate % v.len();
            v.rotate_left(k);
        }
        v
    };
    let groups = record.robustness().groups();
    EvaluationRecord::new(
        record.detector(),
        record.metric(),
        shuffle(record.transfer_runs()),
        RobustnessSet::from_runs(
            shuffle(groups[0].runs()),
            shuffle(groups[1].runs()),
            shuffle(groups[2].runs()),
        ),
        record.interpretability(),
        record.efficiency(),
    )
    .unwrap()
}

/// Number of runs at `slot` (see [`with_score`]).
pub fn slot_len(record: &EvaluationRecord, slot: usize) -> usize {
    match slot {
        0 => record.transfer_runs().len(),
        s => record.robustness().groups()[s - 1].runs().len(),
    }
}

pub fn slot_score(record: &EvaluationRecord, slot: usize, index: usize) -> f64 {
    match slot {
        0 => record.transfer_runs()[index].score(),
        s => record.robustness().groups()[s - 1].runs()[index].score(),
    }
}

pub mod checks {
    //! Property bodies shared by the property tests and the acceptance runner.

    use super::*;
    use detector_reliability::ingest::{parse_record, parse_record_bytes, serialize_record};
    use detector_reliability::scoring::score_detector;
    use detector_reliability::{InterpretabilityMode, ScoringPolicy};
    use proptest::test_runner::TestCaseError;

    pub const ORACLE_TOLERANCE: f64 = 1e-12;

    pub fn lenient(missing: MissingGroupPolicy, weights: Weights) -> ScoringPolicy {
        ScoringPolicy {
            missing_group: missing,
            weights,
            interpretability_mode: InterpretabilityMode::Lenient,
            rounding: 2,
        }
    }

    fn unit(x: f64) -> bool {
        (0.0..=1.0).contains(&x)
    }

    pub fn range(record: &EvaluationRecord, weights: Weights) -> Result<(), TestCaseError> {
        for missing in [
            MissingGroupPolicy::ZeroFill,
            MissingGroupPolicy::Renormalize,
        ] {
            let rep = score_detector(record, &lenient(missing, weights)).unwrap();
            for v in rep.pillars.values() {
                prop_assert!(unit(v), "pillar {v} out of range");
            }
            prop_assert!(unit(rep.scg), "scg {} out of range", rep.scg);
        }
        Ok(())
    }

    /// Raises one run score and checks T, R and SCG do not decrease.
    pub fn monotone(
        record: &EvaluationRecord,
        slot: usize,
        pick: usize,
        lift: f64,
        weights: Weights,
    ) -> Result<(), TestCaseError> {
        let len = slot_len(record, slot);
        if len == 0 {
            return Ok(());
        }
        let index = pick % len;
        let old = slot_score(record, slot, index);
        let new = old + (1.0 - old) * lift;
        let raised = with_score(record, slot, index, new);
        for missing in [
            MissingGroupPolicy::ZeroFill,
            MissingGroupPolicy::Renormalize,
        ] {
            let policy = lenient(missing, weights);
            let a = score_detector(record, &policy).unwrap();
            let b = score_detector(&raised, &policy).unwrap();
            prop_assert!(b.pillars.transferability >= a.pillars.transferability);
            prop_assert!(b.pillars.robustness >= a.pillars.robustness);
            prop_assert!(b.scg >= a.scg, "scg fell from {} to {}", a.scg, b.scg);
        }
        Ok(())
    }

    pub fn permutation(
        record: &EvaluationRecord,
        rotate: usize,
        weights: Weights,
    ) -> Result<(), TestCaseError> {
        let shuffled = permuted(record, rotate);
        for missing in [
            MissingGroupPolicy::ZeroFill,
            MissingGroupPolicy::Renormalize,
        ] {
            let policy = lenient(missing, weights);
            let a = score_detector(record, &policy).unwrap();
            let b = score_detector(&shuffled, &policy).unwrap();
            for (x, y) in a.pillars.values().iter().zip(b.pillars.values()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            prop_assert_eq!(a.scg.to_bits(), b.scg.to_bits());
            for (x, y) in a.group_means.iter().zip(b.group_means) {
                prop_assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
            }
        }
        Ok(())
    }

    pub fn policy_order(record: &EvaluationRecord) -> Result<(), TestCaseError> {
        let zero = score_detector(
            record,
            &lenient(MissingGroupPolicy::ZeroFill, Weights::EQUAL),
        )
        .unwrap();
        let renorm = score_detector(
            record,
            &lenient(MissingGroupPolicy::Renormalize, Weights::EQUAL),
        )
        .unwrap();
        prop_assert!(zero.pillars.robustness <= renorm.pillars.robustness);
        Ok(())
    }

    pub fn equal_weight_mean(record: &EvaluationRecord) -> Result<(), TestCaseError> {
        let rep = score_detector(
            record,
            &lenient(MissingGroupPolicy::ZeroFill, Weights::EQUAL),
        )
        .unwrap();
        let [t, r, i, e] = rep.pillars.values();
        let plain = (t + r + i + e) / 4.0;
        prop_assert!(
            (rep.scg - plain).abs() <= ORACLE_TOLERANCE,
            "{} vs {}",
            rep.scg,
            plain
        );
        Ok(())
    }

    pub fn oracle_equivalence(
        record: &EvaluationRecord,
        weights: Weights,
    ) -> Result<(), TestCaseError> {
        for missing in [
            MissingGroupPolicy::ZeroFill,
            MissingGroupPolicy::Renormalize,
        ] {
            let rep = score_detector(record, &lenient(missing, weights)).unwrap();
            let o = oracle(record, missing, &weights);
            let pairs = [
                (rep.pillars.transferability, o.t),
                (rep.pillars.robustness, o.r),
                (rep.pillars.interpretability, o.i),
                (rep.pillars.efficiency, o.e),
                (rep.scg, o.scg.min(1.0)),
            ];
            for (got, want) in pairs {
                prop_assert!(
                    (got - want).abs() <= ORACLE_TOLERANCE,
                    "{got} vs oracle {want}"
                );
            }
        }
        Ok(())
    }

    pub fn roundtrip(record: &EvaluationRecord) -> Result<(), TestCaseError> {
        let text = serialize_record(record);
        let back = parse_record(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, record);
        prop_assert_eq!(serialize_record(&back), text);
        Ok(())
    }

    /// Parsing arbitrary bytes must return, never panic. Rejections must carry issues.
    pub fn parse_total(bytes: &[u8]) -> Result<(), TestCaseError> {
        if let Err(e) = parse_record_bytes(bytes) {
            prop_assert!(!e.issues().is_empty());
        }
        Ok(())
    }
}
