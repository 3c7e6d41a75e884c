#![allow(dead_code)]

use std::path::PathBuf;

use gaitscope::mocap::{Channel, JointSpec};
use gaitscope::synth::{generate, HeadingProfile, SyntheticWalk, WalkerSpec};
use gaitscope::{Axis, MetricsReport, MotionClip, Skeleton};
use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::Rng;

pub type Mat4 = [[f64; 4]; 4];

/// Per-joint positions per frame, and end-site positions for joints that have one.
pub type OracleTracks = (Vec<Vec<[f64; 3]>>, Vec<Option<Vec<[f64; 3]>>>);

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn translation(x: f64, y: f64, z: f64) -> Mat4 {
    let mut m = IDENTITY;
    m[0][3] = x;
    m[1][3] = y;
    m[2][3] = z;
    m
}

/// Right-handed rotation about one coordinate axis, angle in degrees.
pub fn elementary(axis: Axis, degrees: f64) -> Mat4 {
    let (s, c) = degrees.to_radians().sin_cos();
    let mut m = IDENTITY;
    let (i, j) = match axis {
        Axis::X => (1, 2),
        Axis::Y => (2, 0),
        Axis::Z => (0, 1),
    };
    m[i][i] = c;
    m[i][j] = -s;
    m[j][i] = s;
    m[j][j] = c;
    m
}

/// World positions of every joint (and end site, when present) per frame,
/// by composing homogeneous matrices down the hierarchy.
pub fn matrix_oracle(clip: &MotionClip) -> OracleTracks {
    let joints = clip.skeleton().joints();
    let mut positions = vec![Vec::new(); joints.len()];
    let mut ends: Vec<Option<Vec<[f64; 3]>>> = joints.iter().map(|j| j.end_site.map(|_| Vec::new())).collect();
    for f in 0..clip.frame_count() {
        let row = clip.frame(f);
        let mut globals: Vec<Mat4> = Vec::with_capacity(joints.len());
        for (index, joint) in joints.iter().enumerate() {
            let mut t = [joint.offset.x, joint.offset.y, joint.offset.z];
            let mut rotation = IDENTITY;
            for (k, channel) in joint.channels.iter().enumerate() {
                let value = row[joint.first_column() + k];
                match channel {
                    Channel::Position(a) => t[a.index()] += value,
                    Channel::Rotation(a) => rotation = mul(&rotation, &elementary(*a, value)),
                }
            }
            let local = mul(&translation(t[0], t[1], t[2]), &rotation);
            let global = match joint.parent {
                Some(p) => mul(&globals[p], &local),
                None => local,
            };
            positions[index].push([global[0][3], global[1][3], global[2][3]]);
            if let (Some(e), Some(track)) = (joint.end_site, ends[index].as_mut()) {
                let tip = mul(&global, &translation(e.x, e.y, e.z));
                track.push([tip[0][3], tip[1][3], tip[2][3]]);
            }
            globals.push(global);
        }
    }
    (positions, ends)
}

fn random_rotations<R: Rng>(rng: &mut R) -> Vec<Channel> {
    let mut axes = [Axis::X, Axis::Y, Axis::Z];
    axes.shuffle(rng);
    axes.into_iter().map(Channel::Rotation).collect()
}

fn random_offset<R: Rng>(rng: &mut R) -> Vector3<f64> {
    Vector3::new(
        rng.random_range(-20.0..20.0),
        rng.random_range(-20.0..20.0),
        rng.random_range(-20.0..20.0),
    )
}

/// A random hierarchy no deeper than `max_depth` with random channel
/// layouts and random frame values.
pub fn random_clip<R: Rng>(rng: &mut R, max_depth: usize) -> MotionClip {
    let joint_count = if max_depth > 1 { rng.random_range(1..=14) } else { 1 };
    let mut depth = vec![0usize];
    let mut position = [Axis::X, Axis::Y, Axis::Z];
    position.shuffle(rng);
    let mut root_channels: Vec<Channel> = position.into_iter().map(Channel::Position).collect();
    root_channels.extend(random_rotations(rng));
    root_channels.shuffle(rng);
    let mut specs = vec![JointSpec {
        name: "root joint".into(),
        parent: None,
        offset: random_offset(rng),
        channels: root_channels,
        end_site: None,
    }];
    for i in 1..joint_count {
        let candidates: Vec<usize> = (0..i).filter(|&p| depth[p] + 1 < max_depth).collect();
        let parent = candidates[rng.random_range(0..candidates.len())];
        depth.push(depth[parent] + 1);
        let mut channels = match rng.random_range(0..4) {
            0 => Vec::new(),
            1 => {
                let mut c = random_rotations(rng);
                c.extend([Channel::Position(Axis::Z), Channel::Position(Axis::X), Channel::Position(Axis::Y)]);
                c
            }
            _ => random_rotations(rng),
        };
        channels.shuffle(rng);
        specs.push(JointSpec {
            name: format!("joint {i}"),
            parent: Some(parent),
            offset: random_offset(rng),
            channels,
            end_site: rng.random_bool(0.4).then(|| random_offset(rng)),
        });
    }
    let skeleton = Skeleton::new(specs).expect("random skeleton is valid");
    let frames = rng.random_range(1..=8);
    let data = (0..frames * skeleton.channel_count())
        .map(|_| rng.random_range(-180.0..180.0))
        .collect();
    MotionClip::new(skeleton, 1.0 / 30.0, data).expect("random clip is valid")
}

pub fn published_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/published")
}

pub fn published_pair(dataset: &str) -> (MetricsReport, MetricsReport) {
    let load = |style: &str| {
        let path = published_dir().join(format!("{dataset}_{style}.json"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        MetricsReport::from_json(&text).expect("fixture parses")
    };
    (load("old"), load("normative"))
}

pub const PUBLISHED_DATASETS: [&str; 4] = ["xia", "cmu", "bfa", "100style"];

/// Synthetic clips shared by the invariance checks.
pub fn invariance_fixtures() -> Vec<(&'static str, SyntheticWalk)> {
    let specs = [
        ("clean straight", WalkerSpec { duration_s: 20.0, ..Default::default() }),
        (
            "noisy slow straight",
            WalkerSpec {
                cadence: 90.0,
                step_length: 0.45,
                step_width: 0.15,
                knee_rom_deg: 25.0,
                noise: 0.004,
                sway: 0.02,
                duration_s: 20.0,
                seed: 11,
                ..Default::default()
            },
        ),
        (
            "figure eight",
            WalkerSpec {
                cadence: 120.0,
                step_length: 0.65,
                duration_s: 40.0,
                noise: 0.002,
                seed: 5,
                heading: HeadingProfile::FigureEight {
                    straight_length: 8.0,
                    radius: 1.5,
                },
                ..Default::default()
            },
        ),
    ];
    specs
        .into_iter()
        .map(|(name, spec)| (name, generate(&spec).expect("fixture spec is valid")))
        .collect()
}
