//! Forward kinematics and the joint-angle and foot-height signals derived
//! from global joint positions.

pub mod euler;

use std::collections::BTreeMap;

use nalgebra::{Rotation3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::SegmentSelection;
use crate::mocap::{Axis, Channel, MotionClip};
use euler::{euler_rotation, vec3};

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("unknown joint `{0}`")]
    UnknownJoint(String),
    #[error("joint `{0}` has no end site")]
    NoEndSite(String),
    #[error("trajectories have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degenerate segment vector at frame {0}")]
    Degenerate(usize),
    #[error("segment selection is empty")]
    EmptySelection,
    #[error("segment [{start}, {end}] is outside a series of {len} samples")]
    OutOfRange { start: usize, end: usize, len: usize },
}

/// Per-frame world positions of one joint.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    pub joint: String,
    pub positions: Vec<Vector3<f64>>,
    pub frame_time: f64,
}

impl JointTrajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions projected onto the plane orthogonal to `up`.
    pub fn horizontal(&self, up: Axis) -> Vec<Vector2<f64>> {
        self.positions.iter().map(|p| horizontal(p, up)).collect()
    }
}

pub fn horizontal(p: &Vector3<f64>, up: Axis) -> Vector2<f64> {
    let (a, b) = up.horizontal();
    Vector2::new(p[a.index()], p[b.index()])
}

/// Global trajectories for every joint and end site of a clip.
#[derive(Debug, Clone)]
pub struct ForwardKinematics {
    pub joints: BTreeMap<String, JointTrajectory>,
    /// End-site trajectories keyed by the owning joint's name.
    pub end_sites: BTreeMap<String, JointTrajectory>,
}

impl ForwardKinematics {
    pub fn joint(&self, name: &str) -> Result<&JointTrajectory, KinematicsError> {
        self.joints
            .get(name)
            .ok_or_else(|| KinematicsError::UnknownJoint(name.to_string()))
    }

    pub fn end_site(&self, name: &str) -> Result<&JointTrajectory, KinematicsError> {
        self.joint(name)?;
        self.end_sites
            .get(name)
            .ok_or_else(|| KinematicsError::NoEndSite(name.to_string()))
    }
}

struct JointColumns {
    position: [Option<usize>; 3],
    rotation: [usize; 3],
}

/// Computes world positions as `global(j) = global(parent) · T(offset + p) · R`,
/// where `p` are the joint's position channels and `R` composes its rotation
/// channels in declaration order.
pub fn forward_kinematics(clip: &MotionClip) -> ForwardKinematics {
    let skeleton = clip.skeleton();
    let joints = skeleton.joints();
    let columns: Vec<JointColumns> = joints
        .iter()
        .map(|j| {
            let mut position = [None; 3];
            let mut rotation = [0; 3];
            let mut slot = 0;
            for (k, c) in j.channels.iter().enumerate() {
                match c {
                    Channel::Position(a) => position[a.index()] = Some(j.first_column() + k),
                    Channel::Rotation(_) => {
                        rotation[slot] = j.first_column() + k;
                        slot += 1;
                    }
                }
            }
            JointColumns { position, rotation }
        })
        .collect();

    let n = clip.frame_count();
    let mut positions: Vec<Vec<Vector3<f64>>> = vec![Vec::with_capacity(n); joints.len()];
    let mut sites: Vec<Vec<Vector3<f64>>> = vec![Vec::new(); joints.len()];
    let mut rot = vec![Rotation3::identity(); joints.len()];
    let mut pos = vec![Vector3::zeros(); joints.len()];

    for row in clip.frames() {
        for (j, joint) in joints.iter().enumerate() {
            let cols = &columns[j];
            let translation = joint.offset + vec3(row, &cols.position);
            let local = match joint.rotation_order() {
                Some(order) => euler_rotation(
                    order,
                    [row[cols.rotation[0]], row[cols.rotation[1]], row[cols.rotation[2]]],
                ),
                None => Rotation3::identity(),
            };
            let (p, r) = match joint.parent {
                Some(parent) => (pos[parent] + rot[parent] * translation, rot[parent] * local),
                None => (translation, local),
            };
            pos[j] = p;
            rot[j] = r;
            positions[j].push(p);
            if let Some(site) = &joint.end_site {
                sites[j].push(p + r * site);
            }
        }
    }

    let dt = clip.frame_time();
    let mut out = ForwardKinematics {
        joints: BTreeMap::new(),
        end_sites: BTreeMap::new(),
    };
    for ((joint, p), s) in joints.iter().zip(positions).zip(sites) {
        if joint.end_site.is_some() {
            out.end_sites.insert(
                joint.name.clone(),
                JointTrajectory {
                    joint: joint.name.clone(),
                    positions: s,
                    frame_time: dt,
                },
            );
        }
        out.joints.insert(
            joint.name.clone(),
            JointTrajectory {
                joint: joint.name.clone(),
                positions: p,
                frame_time: dt,
            },
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleDefinition {
    InteriorFlexion,
    ChannelLocal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSeries {
    pub joint: String,
    pub degrees: Vec<f64>,
    pub definition: AngleDefinition,
}

/// Flexion at `center`: 180° minus the angle between the segments toward
/// `proximal` and `distal`. A straight limb reads 0°.
pub fn interior_flexion_angle(
    proximal: &JointTrajectory,
    center: &JointTrajectory,
    distal: &JointTrajectory,
) -> Result<AngleSeries, KinematicsError> {
    for other in [proximal, distal] {
        if other.len() != center.len() {
            return Err(KinematicsError::LengthMismatch(center.len(), other.len()));
        }
    }
    let degrees = center
        .positions
        .iter()
        .zip(&proximal.positions)
        .zip(&distal.positions)
        .enumerate()
        .map(|(frame, ((c, p), d))| {
            let u = p - c;
            let v = d - c;
            if u.norm() <= 1e-9 || v.norm() <= 1e-9 {
                return Err(KinematicsError::Degenerate(frame));
            }
            let interior = u.cross(&v).norm().atan2(u.dot(&v));
            Ok(180.0 - interior.to_degrees())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AngleSeries {
        joint: center.joint.clone(),
        degrees,
        definition: AngleDefinition::InteriorFlexion,
    })
}

/// Raw values of one rotation channel.
pub fn channel_angle(clip: &MotionClip, joint: &str, axis: Axis) -> Result<AngleSeries, KinematicsError> {
    let j = clip
        .skeleton()
        .joint(joint)
        .ok_or_else(|| KinematicsError::UnknownJoint(joint.to_string()))?;
    let k = j
        .channels
        .iter()
        .position(|c| *c == Channel::Rotation(axis))
        .ok_or_else(|| KinematicsError::UnknownJoint(format!("{joint}.{axis}rotation")))?;
    let col = j.first_column() + k;
    Ok(AngleSeries {
        joint: joint.to_string(),
        degrees: clip.frames().map(|r| r[col]).collect(),
        definition: AngleDefinition::ChannelLocal,
    })
}

/// Vertical coordinate of the foot joint (or its end site) per frame.
pub fn foot_height_signal(
    fk: &ForwardKinematics,
    foot: &str,
    up: Axis,
    use_end_site: bool,
) -> Result<Vec<f64>, KinematicsError> {
    let traj = if use_end_site { fk.end_site(foot)? } else { fk.joint(foot)? };
    Ok(traj.positions.iter().map(|p| p[up.index()]).collect())
}

/// Max minus min of the series over the included segments.
pub fn range_of_motion(series: &AngleSeries, segments: &SegmentSelection) -> Result<f64, KinematicsError> {
    if segments.ranges.is_empty() {
        return Err(KinematicsError::EmptySelection);
    }
    let len = series.degrees.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in &segments.ranges {
        if r.end >= len || r.start > r.end {
            return Err(KinematicsError::OutOfRange { start: r.start, end: r.end, len });
        }
        for &v in &series.degrees[r.start..=r.end] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok(hi - lo)
}
