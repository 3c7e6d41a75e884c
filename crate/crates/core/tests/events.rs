use gaitscope::events::{detect_events, heel_strikes_alternate, EventParams};
use gaitscope::synth::{generate, HeadingProfile, WalkerSpec};
use gaitscope::{analyze_clip, AnalysisConfig, ReportSource};
use proptest::prelude::*;

fn walker(spec: WalkerSpec) -> gaitscope::synth::SyntheticWalk {
    generate(&spec).expect("valid spec")
}

#[test]
fn detection_is_deterministic() {
    let walk = walker(WalkerSpec {
        noise: 0.005,
        seed: 21,
        duration_s: 15.0,
        ..Default::default()
    });
    let config = AnalysisConfig::default();
    let a = analyze_clip(&walk.clip, &config, None, ReportSource::default()).unwrap();
    let b = analyze_clip(&walk.clip, &config, None, ReportSource::default()).unwrap();
    assert_eq!(a.events, b.events);
    assert_eq!(a.segments, b.segments);
    assert_eq!(a.report, b.report);
}

#[test]
fn heel_strikes_alternate_and_track_contacts() {
    for (seed, cadence) in [(1, 85.0), (2, 110.0), (3, 145.0)] {
        let walk = walker(WalkerSpec {
            cadence,
            noise: 0.003,
            seed,
            duration_s: 20.0,
            ..Default::default()
        });
        let a = analyze_clip(&walk.clip, &AnalysisConfig::default(), None, ReportSource::default()).unwrap();
        let left = a.events.left.heel_strikes.frames().expect("flat floor gives strikes");
        let right = a.events.right.heel_strikes.frames().expect("flat floor gives strikes");
        assert!(heel_strikes_alternate(left, right, &a.segments));
        let dt = walk.clip.frame_time();
        for (found, truth) in [(left, &walk.truth.left_contacts), (right, &walk.truth.right_contacts)] {
            for &f in found {
                let t = f as f64 * dt;
                let nearest = truth.iter().map(|c| (c - t).abs()).fold(f64::INFINITY, f64::min);
                assert!(nearest <= 3.0 * dt, "cadence {cadence}: strike at {t:.3} s is {nearest:.3} s from contact");
            }
        }
    }
}

#[test]
fn figure_eight_lobes_are_excluded() {
    let spec = WalkerSpec {
        cadence: 110.0,
        duration_s: 60.0,
        heading: HeadingProfile::FigureEight {
            straight_length: 10.0,
            radius: 1.5,
        },
        ..Default::default()
    };
    let walk = walker(spec.clone());
    let a = analyze_clip(&walk.clip, &AnalysisConfig::default(), None, ReportSource::default()).unwrap();
    assert!(a.segments.ranges.len() >= 2, "{:?}", a.segments.ranges);
    assert!(a.segments.log.iter().any(|l| l.contains("turning")));
    let mut curved = 0;
    let mut included = 0;
    for r in &a.segments.ranges {
        for f in r.start..=r.end {
            included += 1;
            if walk.curvature_at(f, &spec).abs() > 0.0 {
                curved += 1;
            }
        }
    }
    assert!((curved as f64) < 0.05 * included as f64, "{curved} of {included} included frames are on arcs");
    let straight = walker(WalkerSpec {
        duration_s: 60.0,
        ..Default::default()
    });
    let s = analyze_clip(&straight.clip, &AnalysisConfig::default(), None, ReportSource::default()).unwrap();
    assert_eq!(s.segments.ranges.len(), 1);
}

fn drifting_feet(amplitude: f64, drift: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let dt = 1.0 / 60.0;
    let n = (steps as f64 * 0.55 / dt) as usize;
    let foot = |phase: f64| {
        (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                amplitude * (std::f64::consts::PI * (t / 1.1 + phase)).sin().powi(4) + drift * t
            })
            .collect::<Vec<f64>>()
    };
    (foot(0.0), foot(0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raising_the_threshold_never_loses_reliability(
        drift in 0.0f64..0.02,
        low in 0.01f64..1.0,
        extra in 0.0f64..2.0,
    ) {
        let (l, r) = drifting_feet(0.1, drift, 30);
        let at = |threshold| {
            let params = EventParams { drift_threshold: threshold, ..Default::default() };
            !detect_events(&l, &r, 1.0 / 60.0, &params).heel_strikes_unreliable()
        };
        prop_assert!(!at(low) || at(low + extra));
    }
}
