//! Spatiotemporal gait parameters over selected segments, with per-metric
//! availability and exclusion reasons.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{FrameRange, GaitEvents, HeelStrikes, SegmentSelection};
use crate::kinematics::{range_of_motion, AngleSeries};
use crate::mocap::SpatialUnit;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("segment [{start}, {end}] lasts {duration:.3} s, shorter than {min:.3} s")]
    SegmentTooShort {
        start: usize,
        end: usize,
        duration: f64,
        min: f64,
    },
    #[error("segment [{start}, {end}] has no net displacement")]
    Stationary { start: usize, end: usize },
    #[error("no speed window fits inside the included segments")]
    NoWindow,
    #[error("no included duration")]
    NoDuration,
    #[error("no step events inside the included segments")]
    NoSteps,
    #[error("need at least 2 heel strikes on one foot and 1 on the other inside a segment")]
    TooFewStrikes,
    #[error("segment index {0} is outside the trajectory")]
    OutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    GaitSpeedMean,
    GaitSpeedStd,
    Cadence,
    StepLengthMean,
    StepLengthStd,
    StepWidthMean,
    StepWidthStd,
    StrideLengthMean,
    StepTimeMean,
    StrideTimeMean,
    StrideTimeStd,
    KneeRomLeft,
    KneeRomRight,
    KneeRom,
}

impl MetricId {
    pub const ALL: [MetricId; 14] = [
        MetricId::GaitSpeedMean,
        MetricId::GaitSpeedStd,
        MetricId::Cadence,
        MetricId::StepLengthMean,
        MetricId::StepLengthStd,
        MetricId::StepWidthMean,
        MetricId::StepWidthStd,
        MetricId::StrideLengthMean,
        MetricId::StepTimeMean,
        MetricId::StrideTimeMean,
        MetricId::StrideTimeStd,
        MetricId::KneeRomLeft,
        MetricId::KneeRomRight,
        MetricId::KneeRom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::GaitSpeedMean => "gait_speed_mean",
            MetricId::GaitSpeedStd => "gait_speed_std",
            MetricId::Cadence => "cadence",
            MetricId::StepLengthMean => "step_length_mean",
            MetricId::StepLengthStd => "step_length_std",
            MetricId::StepWidthMean => "step_width_mean",
            MetricId::StepWidthStd => "step_width_std",
            MetricId::StrideLengthMean => "stride_length_mean",
            MetricId::StepTimeMean => "step_time_mean",
            MetricId::StrideTimeMean => "stride_time_mean",
            MetricId::StrideTimeStd => "stride_time_std",
            MetricId::KneeRomLeft => "knee_rom_left",
            MetricId::KneeRomRight => "knee_rom_right",
            MetricId::KneeRom => "knee_rom",
        }
    }

    /// Metrics computed from heel-strike frames.
    pub fn needs_heel_strikes(self) -> bool {
        matches!(
            self,
            MetricId::StepLengthMean
                | MetricId::StepLengthStd
                | MetricId::StepWidthMean
                | MetricId::StepWidthStd
                | MetricId::StrideLengthMean
                | MetricId::StepTimeMean
                | MetricId::StrideTimeMean
                | MetricId::StrideTimeStd
        )
    }

    /// Metrics that depend on the shape of the walked path.
    pub fn needs_comparable_trajectories(self) -> bool {
        matches!(
            self,
            MetricId::StepLengthMean
                | MetricId::StepLengthStd
                | MetricId::StepWidthMean
                | MetricId::StepWidthStd
                | MetricId::StrideLengthMean
        )
    }

    /// Unit of the metric given the clip's spatial unit.
    pub fn unit(self, spatial: &SpatialUnit) -> String {
        match self {
            MetricId::GaitSpeedMean | MetricId::GaitSpeedStd => format!("{spatial}/s"),
            MetricId::Cadence => "steps/min".into(),
            MetricId::StepTimeMean | MetricId::StrideTimeMean | MetricId::StrideTimeStd => "s".into(),
            MetricId::KneeRomLeft | MetricId::KneeRomRight | MetricId::KneeRom => "deg".into(),
            _ => spatial.to_string(),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    ProtocolDependence,
    DataScarcity,
    InadequateAccuracy,
    HeelStrikeUnreliable,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::ProtocolDependence => "protocol dependence",
            ExclusionReason::DataScarcity => "data scarcity",
            ExclusionReason::InadequateAccuracy => "inadequate accuracy",
            ExclusionReason::HeelStrikeUnreliable => "heel-strike-unreliable",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Availability {
    Value(f64),
    Excluded(ExclusionReason),
}

impl Availability {
    pub fn value(&self) -> Option<f64> {
        match self {
            Availability::Value(v) => Some(*v),
            Availability::Excluded(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GaitMetrics(pub BTreeMap<MetricId, Availability>);

impl GaitMetrics {
    pub fn get(&self, id: MetricId) -> Availability {
        self.0
            .get(&id)
            .copied()
            .unwrap_or(Availability::Excluded(ExclusionReason::DataScarcity))
    }

    pub fn value(&self, id: MetricId) -> Option<f64> {
        self.get(id).value()
    }

    /// Every metric excluded with `reason`.
    pub fn all_excluded(reason: ExclusionReason) -> Self {
        Self(MetricId::ALL.iter().map(|&m| (m, Availability::Excluded(reason))).collect())
    }
}

/// Clip-level facts that decide which metrics are trustworthy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub heel_strikes_reliable: bool,
    /// Same-foot heel-strike pairs inside included segments.
    pub gait_cycles: usize,
}

/// Whether an old/normative pair was recorded under comparable protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolFlags {
    /// Same walked path shape for both styles.
    pub trajectories_comparable: bool,
    /// Same pacing instructions for both styles.
    pub rhythm_comparable: bool,
}

impl Default for ProtocolFlags {
    fn default() -> Self {
        Self {
            trajectories_comparable: true,
            rhythm_comparable: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricParams {
    pub speed_window_s: f64,
    pub speed_hop_s: f64,
    pub min_direction_segment_s: f64,
    pub min_cycles_for_variability: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            speed_window_s: 1.0,
            speed_hop_s: 0.5,
            min_direction_segment_s: 1.0,
            min_cycles_for_variability: 10,
        }
    }
}

/// Reason a metric is withheld on policy grounds regardless of whether it
/// could be computed. Heel-strike reliability outranks protocol, which
/// outranks data scarcity.
pub fn policy_exclusion(
    metric: MetricId,
    diagnostics: &Diagnostics,
    flags: &ProtocolFlags,
    params: &MetricParams,
) -> Option<ExclusionReason> {
    let heel_dependent = metric.needs_heel_strikes() || metric == MetricId::Cadence;
    if heel_dependent && !diagnostics.heel_strikes_reliable {
        return Some(ExclusionReason::HeelStrikeUnreliable);
    }
    if metric.needs_comparable_trajectories() && !flags.trajectories_comparable {
        return Some(ExclusionReason::ProtocolDependence);
    }
    if metric == MetricId::Cadence && !flags.rhythm_comparable {
        return Some(ExclusionReason::ProtocolDependence);
    }
    if metric == MetricId::StrideTimeStd && diagnostics.gait_cycles < params.min_cycles_for_variability {
        return Some(ExclusionReason::DataScarcity);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkingFrame {
    pub direction: Vector2<f64>,
    pub lateral: Vector2<f64>,
}

/// Principal axis of the horizontal root path over `segment`, pointing
/// along the net displacement. The lateral axis is the direction turned a
/// quarter-turn counter-clockwise.
pub fn walking_direction(
    root: &[Vector2<f64>],
    segment: FrameRange,
    frame_time: f64,
    min_duration_s: f64,
) -> Result<WalkingFrame, MetricsError> {
    let FrameRange { start, end } = segment;
    if end >= root.len() {
        return Err(MetricsError::OutOfRange(end));
    }
    let duration = segment.duration(frame_time);
    if duration < min_duration_s {
        return Err(MetricsError::SegmentTooShort {
            start,
            end,
            duration,
            min: min_duration_s,
        });
    }
    let points = &root[start..=end];
    let net = points[points.len() - 1] - points[0];
    if net.norm() < 1e-6 {
        return Err(MetricsError::Stationary { start, end });
    }
    let mean = points.iter().sum::<Vector2<f64>>() / points.len() as f64;
    let scatter = points
        .iter()
        .map(|p| (p - mean) * (p - mean).transpose())
        .fold(Matrix2::zeros(), |a, b| a + b);
    let eig = SymmetricEigen::new(scatter);
    let k = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let mut direction: Vector2<f64> = eig.eigenvectors.column(k).into_owned().normalize();
    if direction.dot(&net) < 0.0 {
        direction = -direction;
    }
    Ok(WalkingFrame {
        direction,
        lateral: Vector2::new(-direction.y, direction.x),
    })
}

/// Population mean and standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-window speeds along each segment's walking direction.
pub fn speed_windows(
    root: &[Vector2<f64>],
    segments: &SegmentSelection,
    frames: &[WalkingFrame],
    frame_time: f64,
    params: &MetricParams,
) -> Vec<f64> {
    let window = ((params.speed_window_s / frame_time).round() as usize).max(1);
    let hop = ((params.speed_hop_s / frame_time).round() as usize).max(1);
    let mut speeds = Vec::new();
    for (range, frame) in segments.ranges.iter().zip(frames) {
        let mut s = range.start;
        while s + window <= range.end {
            let d = (root[s + window] - root[s]).dot(&frame.direction);
            speeds.push(d / (window as f64 * frame_time));
            s += hop;
        }
    }
    speeds
}

pub fn gait_speed(
    root: &[Vector2<f64>],
    segments: &SegmentSelection,
    frame_time: f64,
    params: &MetricParams,
) -> Result<(f64, f64), MetricsError> {
    let frames = segment_frames(root, segments, frame_time, params)?;
    let speeds = speed_windows(root, segments, &frames, frame_time, params);
    if speeds.is_empty() {
        return Err(MetricsError::NoWindow);
    }
    Ok(mean_std(&speeds))
}

fn segment_frames(
    root: &[Vector2<f64>],
    segments: &SegmentSelection,
    frame_time: f64,
    params: &MetricParams,
) -> Result<Vec<WalkingFrame>, MetricsError> {
    if segments.is_empty() {
        return Err(MetricsError::NoDuration);
    }
    segments
        .ranges
        .iter()
        .map(|r| walking_direction(root, *r, frame_time, params.min_direction_segment_s))
        .collect()
}

/// Step events of both feet inside the segments per included minute.
pub fn cadence(events: &GaitEvents, segments: &SegmentSelection, frame_time: f64) -> Result<f64, MetricsError> {
    let minutes = segments.included_duration(frame_time) / 60.0;
    if minutes <= 0.0 {
        return Err(MetricsError::NoDuration);
    }
    let steps = events.all_steps().into_iter().filter(|&f| segments.contains(f)).count();
    if steps == 0 {
        return Err(MetricsError::NoSteps);
    }
    Ok(steps as f64 / minutes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// One step between successive opposite-foot heel prints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub from: Side,
    pub length: f64,
    pub width: f64,
    pub time: f64,
}

/// One stride between successive same-foot heel prints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stride {
    pub side: Side,
    pub length: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepStride {
    pub steps: Vec<Step>,
    pub strides: Vec<Stride>,
}

impl StepStride {
    pub fn step_length(&self) -> (f64, f64) {
        mean_std(&self.steps.iter().map(|s| s.length).collect::<Vec<_>>())
    }

    pub fn step_width(&self) -> (f64, f64) {
        mean_std(&self.steps.iter().map(|s| s.width).collect::<Vec<_>>())
    }

    pub fn step_time_mean(&self) -> f64 {
        mean_std(&self.steps.iter().map(|s| s.time).collect::<Vec<_>>()).0
    }

    pub fn stride_length_mean(&self) -> f64 {
        mean_std(&self.strides.iter().map(|s| s.length).collect::<Vec<_>>()).0
    }

    pub fn stride_time(&self) -> (f64, f64) {
        mean_std(&self.strides.iter().map(|s| s.time).collect::<Vec<_>>())
    }
}

/// Heel-print pairs inside each segment, measured in that segment's
/// walking frame. Prints are the foot positions at heel-strike frames.
#[allow(clippy::too_many_arguments)]
pub fn step_and_stride(
    left_strikes: &[usize],
    right_strikes: &[usize],
    left_foot: &[Vector2<f64>],
    right_foot: &[Vector2<f64>],
    segments: &SegmentSelection,
    frames: &[WalkingFrame],
    frame_time: f64,
) -> Result<StepStride, MetricsError> {
    let mut steps = Vec::new();
    let mut strides = Vec::new();
    let mut usable = false;
    for (range, frame) in segments.ranges.iter().zip(frames) {
        let mut prints: Vec<(usize, Side)> = left_strikes
            .iter()
            .filter(|f| range.contains(**f))
            .map(|&f| (f, Side::Left))
            .chain(right_strikes.iter().filter(|f| range.contains(**f)).map(|&f| (f, Side::Right)))
            .collect();
        prints.sort_unstable_by_key(|p| p.0);
        let count = |side| prints.iter().filter(|p| p.1 == side).count();
        let (l, r) = (count(Side::Left), count(Side::Right));
        if (l >= 2 && r >= 1) || (r >= 2 && l >= 1) {
            usable = true;
        }
        let position = |(f, side): (usize, Side)| -> Result<Vector2<f64>, MetricsError> {
            let track = match side {
                Side::Left => left_foot,
                Side::Right => right_foot,
            };
            track.get(f).copied().ok_or(MetricsError::OutOfRange(f))
        };
        for w in prints.windows(2) {
            if w[0].1 != w[1].1 {
                let delta = position(w[1])? - position(w[0])?;
                steps.push(Step {
                    from: w[0].1,
                    length: delta.dot(&frame.direction),
                    width: delta.dot(&frame.lateral).abs(),
                    time: (w[1].0 - w[0].0) as f64 * frame_time,
                });
            }
        }
        for side in [Side::Left, Side::Right] {
            let same: Vec<(usize, Side)> = prints.iter().copied().filter(|p| p.1 == side).collect();
            for w in same.windows(2) {
                let delta = position(w[1])? - position(w[0])?;
                strides.push(Stride {
                    side,
                    length: delta.dot(&frame.direction),
                    time: (w[1].0 - w[0].0) as f64 * frame_time,
                });
            }
        }
    }
    if !usable || steps.is_empty() || strides.is_empty() {
        return Err(MetricsError::TooFewStrikes);
    }
    Ok(StepStride { steps, strides })
}

/// Everything `assemble_metrics` reads, already reduced to planar tracks
/// and angle series.
#[derive(Debug, Clone)]
pub struct MetricInputs<'a> {
    pub frame_time: f64,
    pub root: &'a [Vector2<f64>],
    pub left_foot: &'a [Vector2<f64>],
    pub right_foot: &'a [Vector2<f64>],
    pub left_knee: Option<&'a AngleSeries>,
    pub right_knee: Option<&'a AngleSeries>,
    pub events: &'a GaitEvents,
    pub segments: &'a SegmentSelection,
}

/// Computes every metric that is both computable and admissible under the
/// diagnostics and protocol flags.
pub fn assemble_metrics(inputs: &MetricInputs<'_>, params: &MetricParams, flags: &ProtocolFlags) -> (GaitMetrics, Diagnostics) {
    use Availability::{Excluded, Value};
    let scarce = Excluded(ExclusionReason::DataScarcity);
    let mut out = BTreeMap::new();

    let frames = segment_frames(inputs.root, inputs.segments, inputs.frame_time, params).ok();
    let speed = frames.as_ref().and_then(|f| {
        let w = speed_windows(inputs.root, inputs.segments, f, inputs.frame_time, params);
        (!w.is_empty()).then(|| mean_std(&w))
    });
    out.insert(MetricId::GaitSpeedMean, speed.map_or(scarce, |s| Value(s.0)));
    out.insert(MetricId::GaitSpeedStd, speed.map_or(scarce, |s| Value(s.1)));
    out.insert(
        MetricId::Cadence,
        cadence(inputs.events, inputs.segments, inputs.frame_time).map_or(scarce, Value),
    );

    let strikes = match (&inputs.events.left.heel_strikes, &inputs.events.right.heel_strikes) {
        (HeelStrikes::Available { frames: l, .. }, HeelStrikes::Available { frames: r, .. }) => Some((l, r)),
        _ => None,
    };
    let gait = match (strikes, &frames) {
        (Some((l, r)), Some(f)) => step_and_stride(
            l,
            r,
            inputs.left_foot,
            inputs.right_foot,
            inputs.segments,
            f,
            inputs.frame_time,
        )
        .ok(),
        _ => None,
    };
    let gait_value = |get: &dyn Fn(&StepStride) -> f64| gait.as_ref().map_or(scarce, |g| Value(get(g)));
    out.insert(MetricId::StepLengthMean, gait_value(&|g| g.step_length().0));
    out.insert(MetricId::StepLengthStd, gait_value(&|g| g.step_length().1));
    out.insert(MetricId::StepWidthMean, gait_value(&|g| g.step_width().0));
    out.insert(MetricId::StepWidthStd, gait_value(&|g| g.step_width().1));
    out.insert(MetricId::StrideLengthMean, gait_value(&|g| g.stride_length_mean()));
    out.insert(MetricId::StepTimeMean, gait_value(&|g| g.step_time_mean()));
    out.insert(MetricId::StrideTimeMean, gait_value(&|g| g.stride_time().0));
    out.insert(MetricId::StrideTimeStd, gait_value(&|g| g.stride_time().1));

    let rom = |s: Option<&AngleSeries>| s.and_then(|s| range_of_motion(s, inputs.segments).ok());
    let (left, right) = (rom(inputs.left_knee), rom(inputs.right_knee));
    out.insert(MetricId::KneeRomLeft, left.map_or(scarce, Value));
    out.insert(MetricId::KneeRomRight, right.map_or(scarce, Value));
    out.insert(
        MetricId::KneeRom,
        match (left, right) {
            (Some(a), Some(b)) => Value(0.5 * (a + b)),
            _ => scarce,
        },
    );

    let diagnostics = Diagnostics {
        heel_strikes_reliable: !inputs.events.heel_strikes_unreliable(),
        gait_cycles: gait.as_ref().map_or(0, |g| g.strides.len()),
    };
    for (&id, slot) in out.iter_mut() {
        if let Some(reason) = policy_exclusion(id, &diagnostics, flags, params) {
            *slot = Excluded(reason);
        }
    }
    (GaitMetrics(out), diagnostics)
}
