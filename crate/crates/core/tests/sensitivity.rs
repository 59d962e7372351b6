mod common;

use detector_reliability::golden::{golden_records, published_policy, PUBLISHED_PILLARS};
use detector_reliability::report::round_display;
use detector_reliability::scoring::{scg, score_all, score_detector};
use detector_reliability::sensitivity::{compare_missing_policies, weight_sweep};
use detector_reliability::{
    EfficiencySource, EvaluationRecord, InterpretabilityBand, InterpretabilityRating, MetricKind,
    MissingGroupPolicy, ModelError, RobustnessSet, ScoreRun, Weights,
};
use proptest::prelude::*;

fn run(s: f64) -> Vec<ScoreRun> {
    vec![ScoreRun::new("r", s).unwrap()]
}

#[test]
fn truthlens_renormalized() {
    let deltas = compare_missing_policies(&golden_records(), &published_policy()).unwrap();
    let t = deltas.iter().find(|d| d.detector == "TruthLens").unwrap();
    assert_eq!(round_display(t.scg_zero_fill, 2), "0.56");
    // Hand recomputation: R = 0.94 over the single tested group.
    let expected = (0.94 + 0.94 + 1.00 + 0.00) / 4.0;
    assert!((t.scg_renormalized - expected).abs() < 1e-12);
    assert_eq!(round_display(t.scg_renormalized, 2), "0.72");
}

#[test]
fn fully_tested_record_has_zero_delta() {
    let rec = EvaluationRecord::new(
        "Full",
        MetricKind::Auc,
        run(0.8),
        RobustnessSet::from_runs(run(0.9), run(0.7), run(0.5)),
        InterpretabilityRating::new(InterpretabilityBand::InterpretiveAnalyses, 0.7).unwrap(),
        EfficiencySource::ParamCount(5_000_000),
    )
    .unwrap();
    let d = compare_missing_policies(&[rec], &published_policy()).unwrap();
    assert_eq!(d[0].delta, 0.0);
    assert_eq!((d[0].rank_before, d[0].rank_after), (1, 1));
}

#[test]
fn golden_ranks_under_both_policies() {
    let deltas = compare_missing_policies(&golden_records(), &published_policy()).unwrap();
    let order = |key: fn(&detector_reliability::sensitivity::PolicyDelta) -> usize| {
        let mut v: Vec<_> = deltas
            .iter()
            .map(|d| (key(d), d.detector.as_str()))
            .collect();
        v.sort();
        v.into_iter().map(|(_, n)| n).collect::<Vec<_>>()
    };
    // Oracle: sort recomputed SCGs.
    let mut zero: Vec<_> = deltas
        .iter()
        .map(|d| (d.scg_zero_fill, d.detector.as_str()))
        .collect();
    zero.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    let mut renorm: Vec<_> = deltas
        .iter()
        .map(|d| (d.scg_renormalized, d.detector.as_str()))
        .collect();
    renorm.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));

    assert_eq!(
        order(|d| d.rank_before),
        zero.iter().map(|x| x.1).collect::<Vec<_>>()
    );
    assert_eq!(
        order(|d| d.rank_after),
        renorm.iter().map(|x| x.1).collect::<Vec<_>>()
    );
    assert_eq!(
        order(|d| d.rank_before),
        ["CFM", "OSDFD", "FrePGAN", "TruthLens", "SCLoRA"]
    );
    assert_eq!(
        order(|d| d.rank_after),
        ["CFM", "TruthLens", "OSDFD", "FrePGAN", "SCLoRA"]
    );
    assert!(deltas.iter().all(|d| d.delta >= 0.0));
}

#[test]
fn record_without_robustness_runs_is_rejected() {
    let rec = EvaluationRecord::new(
        "Bare",
        MetricKind::Acc,
        run(0.8),
        RobustnessSet::from_runs(vec![], vec![], vec![]),
        InterpretabilityRating::new(InterpretabilityBand::None, 0.0).unwrap(),
        EfficiencySource::ParamCount(1),
    )
    .unwrap();
    let err = compare_missing_policies(&[rec], &published_policy()).unwrap_err();
    assert!(err.to_string().contains("AllGroupsEmpty"));
}

#[test]
fn equal_weights_reproduce_published_scg() {
    let records = golden_records();
    let sweep = weight_sweep(&records, &[Weights::EQUAL], &published_policy()).unwrap();
    for (name, _, cells) in PUBLISHED_PILLARS {
        let i = sweep.detectors.iter().position(|d| d == name).unwrap();
        assert_eq!(
            round_display(sweep.rows[0].scg[i], 2),
            cells[4].replace(',', ".")
        );
    }
    // Bit-identical to the standard report.
    let reports = score_all(&records, &published_policy()).unwrap();
    for (r, s) in reports.iter().zip(&sweep.rows[0].scg) {
        assert_eq!(r.scg.to_bits(), s.to_bits());
    }
}

#[test]
fn degenerate_weights() {
    let records = golden_records();
    let t_only = Weights::new([1.0, 0.0, 0.0, 0.0]).unwrap();
    let e_only = Weights::new([0.0, 0.0, 0.0, 1.0]).unwrap();
    let sweep = weight_sweep(&records, &[t_only, e_only], &published_policy()).unwrap();
    let reports = score_all(&records, &published_policy()).unwrap();
    for (i, r) in reports.iter().enumerate() {
        assert_eq!(sweep.rows[0].scg[i], r.pillars.transferability);
        assert_eq!(sweep.rows[1].scg[i], r.pillars.efficiency);
    }
    let leader = sweep.rows[1].ranks.iter().position(|&k| k == 1).unwrap();
    assert_eq!(sweep.detectors[leader], "CFM");
}

#[test]
fn bad_weights_are_rejected() {
    assert!(matches!(
        Weights::new([0.5, 0.5, 0.5, 0.0]),
        Err(ModelError::BadWeights(_))
    ));
    assert!(matches!(
        Weights::new([-0.5, 0.5, 0.5, 0.5]),
        Err(ModelError::BadWeights(_))
    ));
}

proptest! {
    #[test]
    fn scg_is_linear_in_each_pillar(
        record in common::record(),
        weights in common::weights(),
        pillar in 0usize..4,
        frac in 0.0f64..=1.0,
    ) {
        let policy = common::checks::lenient(MissingGroupPolicy::ZeroFill, weights);
        let rep = score_detector(&record, &policy).unwrap();
        let base = rep.pillars.clone();
        let mut bumped = base.clone();
        let current = base.values()[pillar];
        let delta = (1.0 - current) * frac;
        match pillar {
            0 => bumped.transferability += delta,
            1 => bumped.robustness += delta,
            2 => bumped.interpretability += delta,
            _ => bumped.efficiency += delta,
        }
        let real_delta = bumped.values()[pillar] - current;
        let a = scg(&base, &weights).unwrap();
        let b = scg(&bumped, &weights).unwrap();
        let w = weights.values()[pillar];
        prop_assert!(((b - a) - w * real_delta).abs() <= 1e-12);
    }

    #[test]
    fn policy_deltas_are_non_negative(records in prop::collection::vec(common::record(), 1..6)) {
        let mut records = records;
        for (i, r) in records.iter_mut().enumerate() {
            // Make names unique.
            *r = EvaluationRecord::new(
                format!("{}-{i}", r.detector()),
                r.metric(),
                r.transfer_runs().to_vec(),
                r.robustness().clone(),
                r.interpretability(),
                r.efficiency(),
            ).unwrap();
        }
        let deltas = compare_missing_policies(&records, &published_policy()).unwrap();
        prop_assert_eq!(deltas.len(), records.len());
        let mut before: Vec<usize> = deltas.iter().map(|d| d.rank_before).collect();
        let mut after: Vec<usize> = deltas.iter().map(|d| d.rank_after).collect();
        before.sort();
        after.sort();
        let expected: Vec<usize> = (1..=records.len()).collect();
        prop_assert_eq!(&before, &expected);
        prop_assert_eq!(&after, &expected);
        for d in deltas {
            prop_assert!(d.delta >= 0.0);
        }
    }
}
