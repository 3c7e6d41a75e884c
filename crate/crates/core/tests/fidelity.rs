mod common;

use gaitscope::fidelity::{judge, Direction, FidelityMetric, Observed};
use gaitscope::{compare_pair, render_report, Availability, ExpectedDirections, MetricId, MetricsReport, ReportFormat, Verdict};
use proptest::prelude::*;

fn swap(v: Verdict) -> Verdict {
    match v {
        Verdict::Consistent => Verdict::Violation,
        Verdict::Violation => Verdict::Consistent,
        other => other,
    }
}

fn scaled(report: &MetricsReport, factor: f64) -> MetricsReport {
    let mut r = report.clone();
    for id in [
        MetricId::GaitSpeedMean,
        MetricId::GaitSpeedStd,
        MetricId::StepLengthMean,
        MetricId::StepLengthStd,
        MetricId::StepWidthMean,
        MetricId::StepWidthStd,
        MetricId::StrideLengthMean,
    ] {
        if let Availability::Value(v) = r.metrics.get(id) {
            r.metrics.0.insert(id, Availability::Value(v * factor));
        }
    }
    r
}

#[test]
fn published_pair_csv_marks_violations() {
    let (old, norm) = common::published_pair("xia");
    let report = compare_pair(&old, &norm, &ExpectedDirections::default(), 0.02).unwrap();
    let csv = render_report(&report, ReportFormat::Csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "metric,old,normative,expected,observed,verdict");
    assert_eq!(lines.len(), 14);
    assert!(lines.contains(&"step_width_mean,1.168,2.039,larger,smaller,VIOLATION"));
    assert!(lines.contains(&"gait_speed_mean,0.167,0.2,smaller,smaller,consistent"));
    assert!(lines.contains(&"ankle_rom,,,,,excluded: inadequate accuracy"));
    assert_eq!(csv, render_report(&report, ReportFormat::Csv).unwrap());
    let json = render_report(&report, ReportFormat::Json).unwrap();
    assert_eq!(json, render_report(&report, ReportFormat::Json).unwrap());
}

#[test]
fn pairs_across_datasets_or_units_are_refused() {
    let (xia_old, _) = common::published_pair("xia");
    let (_, cmu_norm) = common::published_pair("cmu");
    assert!(compare_pair(&xia_old, &cmu_norm, &ExpectedDirections::default(), 0.02).is_err());
    let (old, norm) = common::published_pair("cmu");
    let mut metres = norm.clone();
    metres.spatial_unit = gaitscope::SpatialUnit::Meters;
    assert!(compare_pair(&old, &metres, &ExpectedDirections::default(), 0.02).is_err());
}

#[test]
fn excluded_sides_carry_their_reason() {
    let (old, norm) = common::published_pair("bfa");
    let report = compare_pair(&old, &norm, &ExpectedDirections::default(), 0.02).unwrap();
    assert_eq!(
        report.row(FidelityMetric::Cadence).unwrap().verdict,
        Verdict::Excluded(gaitscope::ExclusionReason::HeelStrikeUnreliable)
    );
    assert_eq!(
        report.row(FidelityMetric::StrideTimeVariability).unwrap().verdict,
        Verdict::Excluded(gaitscope::ExclusionReason::DataScarcity)
    );
}

proptest! {
    #[test]
    fn swapping_inputs_flips_verdicts(
        dataset in 0usize..4,
        smaller in any::<bool>(),
        old in 0.01f64..100.0,
        norm in 0.01f64..100.0,
        tol in 0.0f64..0.2,
    ) {
        let dir = if smaller { Direction::Smaller } else { Direction::Larger };
        let (o, v) = judge(old, norm, dir, tol);
        let (o2, v2) = judge(norm, old, dir, tol);
        prop_assert_eq!(v2, swap(v));
        prop_assert_eq!(o == Observed::Tie, o2 == Observed::Tie);
        let (a, b) = common::published_pair(common::PUBLISHED_DATASETS[dataset]);
        let forward = compare_pair(&a, &b, &ExpectedDirections::default(), tol).unwrap();
        let mut a2 = b.clone();
        let mut b2 = a.clone();
        a2.source.dataset = a.source.dataset.clone();
        b2.source.dataset = a.source.dataset.clone();
        let backward = compare_pair(&a2, &b2, &ExpectedDirections::default(), tol).unwrap();
        for (x, y) in forward.rows.iter().zip(&backward.rows) {
            prop_assert_eq!(y.verdict, swap(x.verdict));
        }
    }

    #[test]
    fn raising_tolerance_keeps_ties(old in 0.01f64..10.0, norm in 0.01f64..10.0, low in 0.0f64..0.5, extra in 0.0f64..0.5) {
        for dir in [Direction::Smaller, Direction::Larger] {
            if judge(old, norm, dir, low).1 == Verdict::Indistinguishable {
                prop_assert_eq!(judge(old, norm, dir, low + extra).1, Verdict::Indistinguishable);
            }
        }
    }

    #[test]
    fn common_rescaling_changes_no_verdict(dataset in 0usize..4, exponent in -3i32..=3) {
        let factor = 10f64.powi(exponent);
        let (a, b) = common::published_pair(common::PUBLISHED_DATASETS[dataset]);
        let base = compare_pair(&a, &b, &ExpectedDirections::default(), 0.02).unwrap();
        let moved = compare_pair(&scaled(&a, factor), &scaled(&b, factor), &ExpectedDirections::default(), 0.02).unwrap();
        for (x, y) in base.rows.iter().zip(&moved.rows) {
            prop_assert_eq!(x.verdict, y.verdict);
        }
    }
}
