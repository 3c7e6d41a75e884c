//! Skeletal motion-capture clips: BVH parsing and serialization, the
//! annotation sidecar, and clip-level transforms (unit rescaling, mirroring,
//! rigid motion, resampling).

mod annotations;
mod parse;
mod transform;
mod write;

use std::collections::HashSet;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use annotations::{
    read_annotations, sidecar_path, write_annotations, AnnotationError, AnnotationSidecar,
    Annotator, ExcludedRange, FootStrikes, SIDECAR_EXTENSION,
};
pub use parse::{parse_bvh, BvhError};
pub use transform::{
    dilate_time, mirror_clip, rescale_clip, resample_clip, rigid_transform_clip, TransformError,
};
pub use write::write_bvh;

/// A Cartesian axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vector3<f64> {
        let mut v = Vector3::zeros();
        v[self.index()] = 1.0;
        v
    }

    /// The two remaining axes, ordered so that the horizontal plane of a
    /// Y-up clip reads as (X, Z) and of a Z-up clip as (X, Y).
    pub fn horizontal(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// One BVH channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Position(Axis),
    Rotation(Axis),
}

impl Channel {
    pub fn keyword(self) -> &'static str {
        match self {
            Channel::Position(Axis::X) => "Xposition",
            Channel::Position(Axis::Y) => "Yposition",
            Channel::Position(Axis::Z) => "Zposition",
            Channel::Rotation(Axis::X) => "Xrotation",
            Channel::Rotation(Axis::Y) => "Yrotation",
            Channel::Rotation(Axis::Z) => "Zrotation",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        let axis = match s.as_bytes().first()? {
            b'X' | b'x' => Axis::X,
            b'Y' | b'y' => Axis::Y,
            b'Z' | b'z' => Axis::Z,
            _ => return None,
        };
        match s[1..].to_ascii_lowercase().as_str() {
            "position" => Some(Channel::Position(axis)),
            "rotation" => Some(Channel::Rotation(axis)),
            _ => None,
        }
    }

    pub fn is_position(self) -> bool {
        matches!(self, Channel::Position(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: Vector3<f64>,
    pub channels: Vec<Channel>,
    pub end_site: Option<Vector3<f64>>,
    rotation_order: Option<[Axis; 3]>,
    first_column: usize,
}

impl Joint {
    /// Rotation axes in channel declaration order, if the joint rotates.
    pub fn rotation_order(&self) -> Option<[Axis; 3]> {
        self.rotation_order
    }

    /// Index of this joint's first channel within a frame row.
    pub fn first_column(&self) -> usize {
        self.first_column
    }
}

/// Description of a joint used to build a [`Skeleton`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: Vector3<f64>,
    pub channels: Vec<Channel>,
    pub end_site: Option<Vector3<f64>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SkeletonError {
    #[error("skeleton has no joints")]
    Empty,
    #[error("skeleton must have exactly one root, found {0}")]
    RootCount(usize),
    #[error("joint `{0}` has a parent that does not precede it")]
    ParentOrder(String),
    #[error("duplicate joint name `{0}`")]
    DuplicateName(String),
    #[error("joint `{0}` declares channel {1} more than once")]
    DuplicateChannel(String, &'static str),
    #[error("joint `{0}` has {1} rotation channels; expected 0 or 3")]
    PartialRotation(String, usize),
    #[error("joint `{0}` has a non-finite offset")]
    NonFiniteOffset(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    joints: Vec<Joint>,
    root: usize,
    channel_count: usize,
}

impl Skeleton {
    pub fn new(specs: Vec<JointSpec>) -> Result<Self, SkeletonError> {
        if specs.is_empty() {
            return Err(SkeletonError::Empty);
        }
        let roots: Vec<usize> = specs
            .iter()
            .enumerate()
            .filter(|(_, j)| j.parent.is_none())
            .map(|(i, _)| i)
            .collect();
        if roots.len() != 1 {
            return Err(SkeletonError::RootCount(roots.len()));
        }
        let mut names = HashSet::new();
        let mut joints = Vec::with_capacity(specs.len());
        let mut column = 0;
        for (i, spec) in specs.into_iter().enumerate() {
            if let Some(p) = spec.parent {
                if p >= i {
                    return Err(SkeletonError::ParentOrder(spec.name));
                }
            }
            if !names.insert(spec.name.clone()) {
                return Err(SkeletonError::DuplicateName(spec.name));
            }
            let finite = spec.offset.iter().all(|v| v.is_finite())
                && spec
                    .end_site
                    .map_or(true, |e| e.iter().all(|v| v.is_finite()));
            if !finite {
                return Err(SkeletonError::NonFiniteOffset(spec.name));
            }
            let mut seen = HashSet::new();
            for c in &spec.channels {
                if !seen.insert(*c) {
                    return Err(SkeletonError::DuplicateChannel(spec.name, c.keyword()));
                }
            }
            let rotations: Vec<Axis> = spec
                .channels
                .iter()
                .filter_map(|c| match c {
                    Channel::Rotation(a) => Some(*a),
                    Channel::Position(_) => None,
                })
                .collect();
            let rotation_order = match rotations.len() {
                0 => None,
                3 => Some([rotations[0], rotations[1], rotations[2]]),
                n => return Err(SkeletonError::PartialRotation(spec.name, n)),
            };
            let width = spec.channels.len();
            joints.push(Joint {
                name: spec.name,
                parent: spec.parent,
                offset: spec.offset,
                channels: spec.channels,
                end_site: spec.end_site,
                rotation_order,
                first_column: column,
            });
            column += width;
        }
        Ok(Self {
            joints,
            root: roots[0],
            channel_count: column,
        })
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    pub(crate) fn specs(&self) -> Vec<JointSpec> {
        self.joints
            .iter()
            .map(|j| JointSpec {
                name: j.name.clone(),
                parent: j.parent,
                offset: j.offset,
                channels: j.channels.clone(),
                end_site: j.end_site,
            })
            .collect()
    }
}

/// Spatial unit of a clip's positions and offsets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialUnit {
    #[default]
    Unknown,
    Meters,
    Centimeters,
    DatasetSpecific(String),
}

impl fmt::Display for SpatialUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpatialUnit::Unknown => f.write_str("unknown"),
            SpatialUnit::Meters => f.write_str("meters"),
            SpatialUnit::Centimeters => f.write_str("centimeters"),
            SpatialUnit::DatasetSpecific(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ClipError {
    #[error("clip has no frames")]
    NoFrames,
    #[error("skeleton declares no channels")]
    NoChannels,
    #[error("frame time {0} is not finite and positive")]
    FrameTime(f64),
    #[error("frame data length {len} is not a multiple of the channel width {width}")]
    Width { len: usize, width: usize },
    #[error("non-finite value at frame {frame}, column {column}")]
    NonFinite { frame: usize, column: usize },
}

/// A parsed motion clip. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    skeleton: Skeleton,
    frame_time: f64,
    data: Vec<f64>,
    spatial_unit: SpatialUnit,
    source_label: String,
}

impl MotionClip {
    /// Builds a clip from row-major frame data.
    pub fn new(skeleton: Skeleton, frame_time: f64, data: Vec<f64>) -> Result<Self, ClipError> {
        if !(frame_time.is_finite() && frame_time > 0.0) {
            return Err(ClipError::FrameTime(frame_time));
        }
        let width = skeleton.channel_count();
        if width == 0 {
            return Err(ClipError::NoChannels);
        }
        if data.is_empty() {
            return Err(ClipError::NoFrames);
        }
        if data.len() % width != 0 {
            return Err(ClipError::Width {
                len: data.len(),
                width,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(ClipError::NonFinite {
                frame: pos / width,
                column: pos % width,
            });
        }
        Ok(Self {
            skeleton,
            frame_time,
            data,
            spatial_unit: SpatialUnit::Unknown,
            source_label: String::new(),
        })
    }

    pub fn with_spatial_unit(mut self, unit: SpatialUnit) -> Self {
        self.spatial_unit = unit;
        self
    }

    pub fn with_source_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = label.into();
        self
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn frame_time(&self) -> f64 {
        self.frame_time
    }

    pub fn frame_count(&self) -> usize {
        self.data.len() / self.width()
    }

    pub fn width(&self) -> usize {
        self.skeleton.channel_count()
    }

    pub fn frame(&self, index: usize) -> &[f64] {
        let w = self.width();
        &self.data[index * w..(index + 1) * w]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.width())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn spatial_unit(&self) -> &SpatialUnit {
        &self.spatial_unit
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    /// Clip duration in seconds, counting each frame as one frame time.
    pub fn duration(&self) -> f64 {
        self.frame_count() as f64 * self.frame_time
    }
}
