//! Deterministic kinematic walker with prescribed gait parameters.
//!
//! The skeleton is Y-up. Heel strikes of step `k` happen at
//! `(k + 0.5) * T` with `T = 60 / cadence`, alternating left (even `k`) and
//! right (odd `k`). Each foot stands for `1.2 T` and swings for `0.8 T`.
//! Thighs carry position channels so the hip can follow the planted ankle,
//! which lets knee flexion follow its prescribed curve exactly.

use std::f64::consts::{PI, TAU};

use nalgebra::{Rotation3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{FootEvents, GaitEvents, HeelStrikes, Provenance};
use crate::metrics::{Availability, GaitMetrics, MetricId};
use crate::mocap::{Axis, Channel, JointSpec, MotionClip, Skeleton, SpatialUnit};

pub const THIGH_LENGTH: f64 = 0.45;
pub const SHANK_LENGTH: f64 = 0.45;
pub const HIP_HALF_WIDTH: f64 = 0.1;
pub const PELVIS_HEIGHT: f64 = 0.95;
pub const MIN_KNEE_FLEXION_DEG: f64 = 5.0;
const STANCE_FRACTION: f64 = 0.6;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("{field} must be finite and positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("step width {0} is negative, so left and right prints would cross")]
    SelfIntersecting(f64),
    #[error("print noise {noise} can push prints across the walking line for step width {width}")]
    NoisyPrints { noise: f64, width: f64 },
    #[error("speed {given} disagrees with step length x cadence / 60 = {derived}")]
    Speed { given: f64, derived: f64 },
    #[error("knee flexion of {0} deg leaves the leg folded beyond 180 deg")]
    Rom(f64),
    #[error("{0}")]
    Profile(String),
}

/// One stretch of path: `length` spatial units over which the heading turns
/// uniformly by `turn_deg` (positive turns left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathPiece {
    pub length: f64,
    #[serde(default)]
    pub turn_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum HeadingProfile {
    Straight,
    /// Repeats: straight, 270 deg left arc, straight, 270 deg right arc.
    FigureEight { straight_length: f64, radius: f64 },
    /// Pieces in order, continuing straight after the last one.
    Piecewise { pieces: Vec<PathPiece> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkerSpec {
    /// Steps per minute.
    pub cadence: f64,
    pub step_length: f64,
    pub step_width: f64,
    /// Must equal `step_length * cadence / 60` when given.
    pub speed: Option<f64>,
    pub knee_rom_deg: f64,
    pub duration_s: f64,
    pub frame_rate: f64,
    pub heading: HeadingProfile,
    /// Half-width of the uniform jitter added to each print.
    pub noise: f64,
    /// Lateral root sway amplitude at the stride frequency.
    pub sway: f64,
    /// Vertical drift of the whole body, units per second.
    pub drift_rate: f64,
    pub swing_height: f64,
    pub seed: u64,
}

impl Default for WalkerSpec {
    fn default() -> Self {
        Self {
            cadence: 110.0,
            step_length: 0.6,
            step_width: 0.1,
            speed: None,
            knee_rom_deg: 40.0,
            duration_s: 30.0,
            frame_rate: 60.0,
            heading: HeadingProfile::Straight,
            noise: 0.0,
            sway: 0.0,
            drift_rate: 0.0,
            swing_height: 0.1,
            seed: 0,
        }
    }
}

impl WalkerSpec {
    pub fn speed(&self) -> f64 {
        self.step_length * self.cadence / 60.0
    }

    pub fn step_time(&self) -> f64 {
        60.0 / self.cadence
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        for (field, value) in [
            ("cadence", self.cadence),
            ("step_length", self.step_length),
            ("knee_rom_deg", self.knee_rom_deg),
            ("duration_s", self.duration_s),
            ("frame_rate", self.frame_rate),
            ("swing_height", self.swing_height),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SynthError::NotPositive { field, value });
            }
        }
        if !self.step_width.is_finite() || self.step_width < 0.0 {
            return Err(SynthError::SelfIntersecting(self.step_width));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0 && self.sway.is_finite() && self.drift_rate.is_finite()) {
            return Err(SynthError::Profile("noise, sway and drift must be finite; noise non-negative".into()));
        }
        if self.step_width > 0.0 && 2.0 * self.noise >= self.step_width {
            return Err(SynthError::NoisyPrints {
                noise: self.noise,
                width: self.step_width,
            });
        }
        if let Some(given) = self.speed {
            let derived = self.speed();
            if (given - derived).abs() > 1e-9 * derived.max(1.0) {
                return Err(SynthError::Speed { given, derived });
            }
        }
        if MIN_KNEE_FLEXION_DEG + self.knee_rom_deg >= 180.0 {
            return Err(SynthError::Rom(MIN_KNEE_FLEXION_DEG + self.knee_rom_deg));
        }
        match &self.heading {
            HeadingProfile::Straight => {}
            HeadingProfile::FigureEight { straight_length, radius } => {
                if !(*straight_length >= 0.0 && *radius > 0.0 && radius.is_finite() && straight_length.is_finite()) {
                    return Err(SynthError::Profile("figure-eight needs a positive radius".into()));
                }
            }
            HeadingProfile::Piecewise { pieces } => {
                if pieces.iter().any(|p| !(p.length > 0.0 && p.length.is_finite() && p.turn_deg.is_finite())) {
                    return Err(SynthError::Profile("path pieces need positive finite lengths".into()));
                }
            }
        }
        Ok(())
    }
}

/// Planar state along the path, in (x, z) coordinates. Heading `psi`
/// measures from +Z toward +X, so the forward vector is (sin psi, cos psi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub position: Vector2<f64>,
    pub heading: f64,
    pub curvature: f64,
}

impl PathState {
    pub fn forward(&self) -> Vector2<f64> {
        Vector2::new(self.heading.sin(), self.heading.cos())
    }

    /// Unit vector to the walker's left.
    pub fn left(&self) -> Vector2<f64> {
        Vector2::new(self.heading.cos(), -self.heading.sin())
    }
}

#[derive(Debug, Clone)]
struct Piece {
    start_s: f64,
    start: Vector2<f64>,
    heading: f64,
    curvature: f64,
}

/// Arc-length parameterized path assembled from constant-curvature pieces.
#[derive(Debug, Clone)]
pub struct Path {
    pieces: Vec<Piece>,
}

fn advance(start: Vector2<f64>, heading: f64, curvature: f64, ds: f64) -> Vector2<f64> {
    if curvature.abs() < 1e-12 {
        return start + ds * Vector2::new(heading.sin(), heading.cos());
    }
    let end = heading + curvature * ds;
    start + Vector2::new(heading.cos() - end.cos(), end.sin() - heading.sin()) / curvature
}

impl Path {
    /// Builds a path covering arc lengths up to at least `s_max`.
    pub fn new(profile: &HeadingProfile, s_max: f64) -> Self {
        let template: Vec<PathPiece> = match profile {
            HeadingProfile::Straight => vec![],
            HeadingProfile::FigureEight { straight_length, radius } => {
                let arc = 1.5 * PI * radius;
                vec![
                    PathPiece { length: *straight_length, turn_deg: 0.0 },
                    PathPiece { length: arc, turn_deg: 270.0 },
                    PathPiece { length: *straight_length, turn_deg: 0.0 },
                    PathPiece { length: arc, turn_deg: -270.0 },
                ]
            }
            HeadingProfile::Piecewise { pieces } => pieces.clone(),
        };
        let cyclic = matches!(profile, HeadingProfile::FigureEight { .. });
        let mut pieces = Vec::new();
        let (mut s, mut pos, mut heading) = (0.0, Vector2::zeros(), 0.0);
        let mut push = |p: &PathPiece, s: &mut f64, pos: &mut Vector2<f64>, heading: &mut f64| {
            if p.length <= 0.0 {
                return;
            }
            let curvature = p.turn_deg.to_radians() / p.length;
            pieces.push(Piece {
                start_s: *s,
                start: *pos,
                heading: *heading,
                curvature,
            });
            *pos = advance(*pos, *heading, curvature, p.length);
            *heading += p.turn_deg.to_radians();
            *s += p.length;
        };
        if cyclic {
            while s <= s_max {
                for p in &template {
                    push(p, &mut s, &mut pos, &mut heading);
                }
            }
        } else {
            for p in &template {
                push(p, &mut s, &mut pos, &mut heading);
            }
        }
        let tail = (s_max - s).max(0.0) + 1.0;
        push(&PathPiece { length: tail, turn_deg: 0.0 }, &mut s, &mut pos, &mut heading);
        Self { pieces }
    }

    /// State at arc length `s`. Negative `s` extends the first heading
    /// backwards.
    pub fn at(&self, s: f64) -> PathState {
        let first = &self.pieces[0];
        if s < 0.0 {
            return PathState {
                position: advance(first.start, first.heading, 0.0, s),
                heading: first.heading,
                curvature: 0.0,
            };
        }
        let idx = self.pieces.partition_point(|p| p.start_s <= s).saturating_sub(1);
        let p = &self.pieces[idx];
        let ds = s - p.start_s;
        PathState {
            position: advance(p.start, p.heading, p.curvature, ds),
            heading: p.heading + p.curvature * ds,
            curvature: p.curvature,
        }
    }
}

/// Values the analysis is expected to recover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub events: GaitEvents,
    pub metrics: GaitMetrics,
    /// Heel-strike times in seconds per foot.
    pub left_contacts: Vec<f64>,
    pub right_contacts: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticWalk {
    pub clip: MotionClip,
    pub truth: GroundTruth,
    pub path: Path,
}

impl SyntheticWalk {
    /// Path curvature under the root at `frame`.
    pub fn curvature_at(&self, frame: usize, spec: &WalkerSpec) -> f64 {
        self.path.at(spec.speed() * frame as f64 / spec.frame_rate).curvature
    }
}

pub const JOINT_NAMES: [&str; 11] = [
    "Hips", "Spine", "Head", "LeftUpLeg", "LeftLeg", "LeftFoot", "LeftToe", "RightUpLeg", "RightLeg",
    "RightFoot", "RightToe",
];

fn skeleton() -> Skeleton {
    use Axis::{X, Y, Z};
    let pos = vec![Channel::Position(X), Channel::Position(Y), Channel::Position(Z)];
    let zxy = vec![Channel::Rotation(Z), Channel::Rotation(X), Channel::Rotation(Y)];
    let root_channels = [pos.clone(), vec![Channel::Rotation(Y), Channel::Rotation(X), Channel::Rotation(Z)]].concat();
    let hip_channels = [pos, zxy.clone()].concat();
    let spec = |name: &str, parent: Option<usize>, offset: [f64; 3], channels: Vec<Channel>, end: Option<[f64; 3]>| JointSpec {
        name: name.into(),
        parent,
        offset: Vector3::from(offset),
        channels,
        end_site: end.map(Vector3::from),
    };
    let mut specs = vec![
        spec("Hips", None, [0.0; 3], root_channels, None),
        spec("Spine", Some(0), [0.0, 0.1, 0.0], zxy.clone(), None),
        spec("Head", Some(1), [0.0, 0.5, 0.0], zxy.clone(), Some([0.0, 0.2, 0.0])),
    ];
    for (side, x) in [("Left", HIP_HALF_WIDTH), ("Right", -HIP_HALF_WIDTH)] {
        let base = specs.len();
        specs.push(spec(&format!("{side}UpLeg"), Some(0), [x, 0.0, 0.0], hip_channels.clone(), None));
        specs.push(spec(&format!("{side}Leg"), Some(base), [0.0, -THIGH_LENGTH, 0.0], zxy.clone(), None));
        specs.push(spec(&format!("{side}Foot"), Some(base + 1), [0.0, -SHANK_LENGTH, 0.0], zxy.clone(), None));
        specs.push(spec(&format!("{side}Toe"), Some(base + 2), [0.0, -0.05, 0.12], zxy.clone(), Some([0.0, 0.0, 0.05])));
    }
    Skeleton::new(specs).expect("walker skeleton is valid")
}

struct Foot {
    /// Print positions indexed by `(k - k0) / 2` over this foot's steps.
    prints: Vec<Vector2<f64>>,
    first_step: i64,
}

impl Foot {
    fn print(&self, k: i64) -> Vector2<f64> {
        self.prints[((k - self.first_step) / 2) as usize]
    }
}

/// Generates a clip together with its ground truth.
pub fn generate(spec: &WalkerSpec) -> Result<SyntheticWalk, SynthError> {
    spec.validate()?;
    let dt = 1.0 / spec.frame_rate;
    let frames = (spec.duration_s * spec.frame_rate).round().max(1.0) as usize;
    let t_step = spec.step_time();
    let v = spec.speed();
    let t_end = (frames - 1) as f64 * dt;
    let path = Path::new(&spec.heading, v * (t_end + 4.0 * t_step));

    // Steps from k = -2 cover the feet before their first contact.
    let last_step = ((t_end / t_step) - 0.5).floor() as i64 + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut feet = [
        Foot { prints: Vec::new(), first_step: -2 },
        Foot { prints: Vec::new(), first_step: -1 },
    ];
    for k in -2..=last_step {
        let state = path.at(v * (k as f64 + 0.5) * t_step);
        let side = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let mut print = state.position + side * 0.5 * spec.step_width * state.left();
        if spec.noise > 0.0 {
            print += Vector2::new(
                rng.random_range(-spec.noise..=spec.noise),
                rng.random_range(-spec.noise..=spec.noise),
            );
        }
        feet[k.rem_euclid(2) as usize].prints.push(print);
    }

    let skeleton = skeleton();
    let width = skeleton.channel_count();
    let mut data = Vec::with_capacity(frames * width);
    let up = Vector3::y();
    let theta_min = MIN_KNEE_FLEXION_DEG.to_radians();
    let rom = spec.knee_rom_deg.to_radians();
    let stance = 2.0 * STANCE_FRACTION * t_step;
    let swing = 2.0 * t_step - stance;
    for i in 0..frames {
        let t = i as f64 * dt;
        let drift = spec.drift_rate * t;
        let state = path.at(v * t);
        let sway = spec.sway * (PI * t / t_step).sin();
        let root_xz = state.position + sway * state.left();
        let root = Vector3::new(root_xz.x, PELVIS_HEIGHT + drift, root_xz.y);
        let psi = state.heading;
        let forward = Vector3::new(psi.sin(), 0.0, psi.cos());
        let yaw = Rotation3::from_axis_angle(&Vector3::y_axis(), psi);

        let mut row = vec![0.0; width];
        row[0] = root.x;
        row[1] = root.y;
        row[2] = root.z;
        row[3] = psi.to_degrees();
        for (side, foot) in feet.iter().enumerate() {
            // Latest contact of this foot at or before t.
            let parity = side as i64;
            let mut k = ((t / t_step - 0.5) / 2.0).floor() as i64 * 2 + parity;
            if (k as f64 + 0.5) * t_step > t {
                k -= 2;
            }
            let tau = t - (k as f64 + 0.5) * t_step;
            let (ankle_xz, lift) = if tau < stance {
                (foot.print(k), 0.0)
            } else {
                let s = (tau - stance) / swing;
                let blend = s - (TAU * s).sin() / TAU;
                let (a, b) = (foot.print(k), foot.print(k + 2));
                (a + blend * (b - a), spec.swing_height * (PI * s).sin())
            };
            let ankle = Vector3::new(ankle_xz.x, lift + drift, ankle_xz.y);
            let phase = tau / (2.0 * t_step) - (STANCE_FRACTION + 0.5 * (1.0 - STANCE_FRACTION) - 0.5);
            let theta = theta_min + rom * 0.5 * (1.0 - (TAU * phase).cos());
            let knee = ankle + SHANK_LENGTH * up;
            let hip = knee + THIGH_LENGTH * (theta.cos() * up + theta.sin() * forward);
            let offset = Vector3::new(if side == 0 { HIP_HALF_WIDTH } else { -HIP_HALF_WIDTH }, 0.0, 0.0);
            let local = yaw.inverse() * (hip - root) - offset;
            let base = 12 + side * 15;
            row[base..base + 3].copy_from_slice(local.as_slice());
            // Zrotation, Xrotation, Yrotation
            row[base + 4] = theta.to_degrees();
            row[base + 7] = -theta.to_degrees();
        }
        data.extend_from_slice(&row);
    }
    let clip = MotionClip::new(skeleton, dt, data)
        .expect("walker frames are finite")
        .with_spatial_unit(SpatialUnit::Meters)
        .with_source_label("synthetic walker");

    let contacts = |parity: i64| -> Vec<f64> {
        (0..=last_step)
            .filter(|k| k.rem_euclid(2) == parity)
            .map(|k| (k as f64 + 0.5) * t_step)
            .filter(|&t| t <= t_end)
            .collect()
    };
    let peaks = |parity: i64| -> Vec<usize> {
        (-2..=last_step)
            .filter(|k| k.rem_euclid(2) == parity)
            .map(|k| ((k as f64 + 0.5) * t_step + stance + 0.5 * swing) / dt)
            .filter(|&f| f >= 0.0 && f.round() <= (frames - 1) as f64)
            .map(|f| f.round() as usize)
            .collect()
    };
    let (left_contacts, right_contacts) = (contacts(0), contacts(1));
    let to_frames = |c: &[f64]| c.iter().map(|t| (t / dt).round() as usize).collect::<Vec<_>>();
    let foot_events = |c: &[f64], parity| FootEvents {
        steps: peaks(parity),
        heel_strikes: HeelStrikes::Available {
            frames: to_frames(c),
            provenance: Provenance::Human,
        },
    };
    let events = GaitEvents {
        left: foot_events(&left_contacts, 0),
        right: foot_events(&right_contacts, 1),
        drift_ratio: Some(0.0),
    };
    let mut metrics = GaitMetrics::default();
    for (id, value) in [
        (MetricId::GaitSpeedMean, v),
        (MetricId::GaitSpeedStd, 0.0),
        (MetricId::Cadence, spec.cadence),
        (MetricId::StepLengthMean, spec.step_length),
        (MetricId::StepWidthMean, spec.step_width),
        (MetricId::StepLengthStd, 0.0),
        (MetricId::StepWidthStd, 0.0),
        (MetricId::StrideLengthMean, 2.0 * spec.step_length),
        (MetricId::StepTimeMean, t_step),
        (MetricId::StrideTimeMean, 2.0 * t_step),
        (MetricId::StrideTimeStd, 0.0),
        (MetricId::KneeRomLeft, spec.knee_rom_deg),
        (MetricId::KneeRomRight, spec.knee_rom_deg),
        (MetricId::KneeRom, spec.knee_rom_deg),
    ] {
        metrics.0.insert(id, Availability::Value(value));
    }
    Ok(SyntheticWalk {
        clip,
        truth: GroundTruth {
            events,
            metrics,
            left_contacts,
            right_contacts,
        },
        path,
    })
}
