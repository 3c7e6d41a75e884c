mod common;

use gaitscope::mocap::{rescale_clip, BvhError};
use gaitscope::synth::{generate, WalkerSpec};
use gaitscope::{parse_bvh, write_bvh, MotionClip};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_round_trip(clip: &MotionClip) {
    let back = parse_bvh(&write_bvh(clip)).expect("written clip parses");
    let (a_skel, b_skel) = (clip.skeleton(), back.skeleton());
    assert_eq!(b_skel.joints().len(), a_skel.joints().len());
    assert!((back.frame_time() - clip.frame_time()).abs() <= 1e-6 * clip.frame_time());
    assert_eq!(back.frame_count(), clip.frame_count());
    let parent_name = |s: &gaitscope::Skeleton, p: Option<usize>| p.map(|i| s.joints()[i].name.clone());
    for a in a_skel.joints() {
        let b = b_skel.joint(&a.name).expect("joint survives");
        assert_eq!(parent_name(a_skel, a.parent), parent_name(b_skel, b.parent));
        assert_eq!(a.channels, b.channels);
        assert!((a.offset - b.offset).amax() <= 1e-6 * a.offset.amax().max(1.0));
        assert_eq!(a.end_site.is_some(), b.end_site.is_some());
        for f in 0..clip.frame_count() {
            let (ra, rb) = (clip.frame(f), back.frame(f));
            for k in 0..a.channels.len() {
                let (x, y) = (ra[a.first_column() + k], rb[b.first_column() + k]);
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{} frame {f}: {x} vs {y}", a.name);
            }
        }
    }
}

#[test]
fn synthetic_walker_round_trips() {
    let walk = generate(&WalkerSpec {
        duration_s: 3.0,
        noise: 0.01,
        seed: 4,
        ..Default::default()
    })
    .unwrap();
    assert_round_trip(&walk.clip);
}

#[test]
fn random_hierarchies_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        assert_round_trip(&common::random_clip(&mut rng, 6));
    }
}

const SMALL: &str = "HIERARCHY
ROOT Hips
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Left Up Leg
  {
    OFFSET 0.1 0 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0 -0.4 0
    }
  }
}
MOTION
Frames: 3
Frame Time: 0.0333333
0 1 0 0 0 0 10 20 30
0.1 1 0 0 5 0 11 21 31
0.2 1 0 0 10 0 12 22 32
";

#[test]
fn accepts_dialect_variants() {
    let base = parse_bvh(SMALL).unwrap();
    let crlf = parse_bvh(&SMALL.replace('\n', "\r\n")).unwrap();
    let tabs = parse_bvh(&SMALL.replace("Frame Time: ", "Frame Time:\t").replace("  ", "\t")).unwrap();
    assert_eq!(base, crlf);
    assert_eq!(base, tabs);
    assert!(base.skeleton().joint("Left Up Leg").is_some());
    assert_eq!(base.width(), 9);
}

fn mutations(text: &str) -> Vec<(String, String)> {
    let lines: Vec<&str> = text.lines().collect();
    let data_start = lines.iter().position(|l| l.starts_with("Frame Time")).unwrap() + 1;
    let mut out = Vec::new();
    for i in data_start..lines.len() {
        let mut dropped = lines.clone();
        let shortened: String = lines[i].rsplit_once(' ').unwrap().0.to_string();
        dropped[i] = &shortened;
        out.push((format!("row {i} missing a value"), dropped.join("\n")));
        let extended = format!("{} 7", lines[i]);
        let mut added = lines.clone();
        added[i] = &extended;
        out.push((format!("row {i} with an extra value"), added.join("\n")));
        let mut removed = lines.clone();
        removed.remove(i);
        out.push((format!("row {i} removed"), removed.join("\n")));
    }
    let mut extra = lines.clone();
    extra.push(lines[lines.len() - 1]);
    out.push(("duplicated last row".into(), extra.join("\n")));
    out.push(("frame count raised".into(), text.replace("Frames: 3", "Frames: 4")));
    out.push(("frame count lowered".into(), text.replace("Frames: 3", "Frames: 2")));
    out.push(("channel count raised".into(), text.replace("CHANNELS 3", "CHANNELS 4")));
    out.push(("channel dropped".into(), text.replace("CHANNELS 3 Zrotation Xrotation Yrotation", "CHANNELS 2 Zrotation Xrotation")));
    out
}

#[test]
fn rejects_width_and_count_mutations() {
    for (label, text) in mutations(SMALL) {
        assert!(parse_bvh(&text).is_err(), "accepted mutation: {label}");
    }
}

#[test]
fn frame_count_errors_are_specific() {
    let err = parse_bvh(&SMALL.replace("Frames: 3", "Frames: 4")).unwrap_err();
    assert!(matches!(err, BvhError::FrameCount { declared: 4, actual: 3 }), "{err}");
    let mut short = SMALL.to_string();
    short = short.replace("0.2 1 0 0 10 0 12 22 32", "0.2 1 0 0 10 0 12 22");
    assert!(matches!(parse_bvh(&short).unwrap_err(), BvhError::ChannelWidth { expected: 9, found: 8, .. }));
}

#[test]
fn rescale_composes() {
    let clip = parse_bvh(SMALL).unwrap();
    let twice = rescale_clip(&rescale_clip(&clip, 4.0).unwrap(), 0.125).unwrap();
    let once = rescale_clip(&clip, 0.5).unwrap();
    assert_eq!(twice.data(), once.data());
    for (a, b) in twice.skeleton().joints().iter().zip(once.skeleton().joints()) {
        assert_eq!(a.offset, b.offset);
        assert_eq!(a.end_site, b.end_site);
    }
    let twice = rescale_clip(&rescale_clip(&clip, 100.0).unwrap(), 0.03).unwrap();
    let once = rescale_clip(&clip, 3.0).unwrap();
    for (x, y) in twice.data().iter().zip(once.data()) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()));
    }
    assert!(rescale_clip(&clip, 0.0).is_err());
    assert!(rescale_clip(&clip, f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_clips_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        assert_round_trip(&common::random_clip(&mut rng, 6));
    }

    #[test]
    fn truncating_any_data_row_is_rejected(row in 0usize..3, keep in 0usize..9) {
        let lines: Vec<String> = SMALL.lines().map(String::from).collect();
        let index = lines.len() - 3 + row;
        let mut mutated = lines.clone();
        mutated[index] = lines[index].split(' ').take(keep).collect::<Vec<_>>().join(" ");
        let text = mutated.join("\n");
        prop_assert!(parse_bvh(&text).is_err());
    }
}
