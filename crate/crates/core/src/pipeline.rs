//! End-to-end analysis of one clip: kinematics, events, annotation merge,
//! segment selection and metrics.

use nalgebra::Vector2;
use thiserror::Error;

use crate::config::{AnalysisConfig, ConfigError};
use crate::events::{detect_events, merge_annotations, select_segments, EventsError, GaitEvents, SegmentSelection};
use crate::kinematics::{forward_kinematics, interior_flexion_angle, AngleSeries, KinematicsError};
use crate::metrics::{assemble_metrics, Diagnostics, MetricInputs};
use crate::mocap::{AnnotationError, AnnotationSidecar, MotionClip};
use crate::report::{definition_notes, FootSummary, MetricsReport, ReportDiagnostics, ReportSource};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("annotation sidecar: {0}")]
    Annotation(#[from] AnnotationError),
}

/// Per-frame signals derived from forward kinematics.
#[derive(Debug, Clone)]
pub struct Signals {
    pub frame_time: f64,
    /// Horizontal root path.
    pub root: Vec<Vector2<f64>>,
    pub left_foot: Vec<Vector2<f64>>,
    pub right_foot: Vec<Vector2<f64>>,
    pub left_foot_height: Vec<f64>,
    pub right_foot_height: Vec<f64>,
    pub left_knee: AngleSeries,
    pub right_knee: AngleSeries,
}

pub fn extract_signals(clip: &MotionClip, config: &AnalysisConfig) -> Result<Signals, AnalysisError> {
    config.bind(clip.skeleton())?;
    let fk = forward_kinematics(clip);
    let up = config.up_axis;
    let j = &config.joints;
    let foot = |name: &str| {
        if config.use_end_site {
            fk.end_site(name)
        } else {
            fk.joint(name)
        }
    };
    let knee = |leg: &crate::config::LegJoints| {
        interior_flexion_angle(fk.joint(&leg.hip)?, fk.joint(&leg.knee)?, fk.joint(&leg.ankle)?)
    };
    let (lf, rf) = (foot(&j.left.foot)?, foot(&j.right.foot)?);
    let height = |t: &crate::kinematics::JointTrajectory| t.positions.iter().map(|p| p[up.index()]).collect();
    Ok(Signals {
        frame_time: clip.frame_time(),
        root: fk.joint(&j.root)?.horizontal(up),
        left_foot: lf.horizontal(up),
        right_foot: rf.horizontal(up),
        left_foot_height: height(lf),
        right_foot_height: height(rf),
        left_knee: knee(&j.left)?,
        right_knee: knee(&j.right)?,
    })
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub signals: Signals,
    pub auto_events: GaitEvents,
    pub auto_segments: SegmentSelection,
    pub events: GaitEvents,
    pub segments: SegmentSelection,
    pub diagnostics: Diagnostics,
    pub report: MetricsReport,
}

/// Segments from the automatic selector. An empty selection carries the
/// log explaining why nothing was kept.
pub fn auto_segments(signals: &Signals, events: &GaitEvents, config: &AnalysisConfig) -> SegmentSelection {
    match select_segments(&signals.root, signals.frame_time, &events.all_steps(), &config.segments) {
        Ok(s) => s,
        Err(EventsError::NoAnalyzableSegment { mut log }) => {
            log.push("no analyzable segment".into());
            SegmentSelection { ranges: vec![], log }
        }
        Err(e) => SegmentSelection {
            ranges: vec![],
            log: vec![e.to_string()],
        },
    }
}

pub fn analyze_clip(
    clip: &MotionClip,
    config: &AnalysisConfig,
    sidecar: Option<&AnnotationSidecar>,
    source: ReportSource,
) -> Result<Analysis, AnalysisError> {
    config.validate()?;
    let signals = extract_signals(clip, config)?;
    let auto_events = detect_events(
        &signals.left_foot_height,
        &signals.right_foot_height,
        signals.frame_time,
        &config.events,
    );
    let auto_segments = auto_segments(&signals, &auto_events, config);
    let (events, segments) = match sidecar {
        Some(s) => merge_annotations(&auto_events, &auto_segments, s, clip.frame_count())?,
        None => (auto_events.clone(), auto_segments.clone()),
    };
    let inputs = MetricInputs {
        frame_time: signals.frame_time,
        root: &signals.root,
        left_foot: &signals.left_foot,
        right_foot: &signals.right_foot,
        left_knee: Some(&signals.left_knee),
        right_knee: Some(&signals.right_knee),
        events: &events,
        segments: &segments,
    };
    let (metrics, diagnostics) = assemble_metrics(&inputs, &config.metrics, &config.protocol);
    let summary = |f: &crate::events::FootEvents| FootSummary {
        step_events: f.steps.len(),
        heel_strikes: f.heel_strikes.frames().map(<[usize]>::len),
        heel_strike_provenance: match &f.heel_strikes {
            crate::events::HeelStrikes::Available { provenance, .. } => Some(*provenance),
            _ => None,
        },
    };
    let report = MetricsReport {
        source,
        spatial_unit: clip.spatial_unit().clone(),
        metrics,
        diagnostics: Some(ReportDiagnostics {
            frame_count: clip.frame_count(),
            frame_time: clip.frame_time(),
            drift_ratio: events.drift_ratio,
            heel_strikes_reliable: diagnostics.heel_strikes_reliable,
            gait_cycles: diagnostics.gait_cycles,
            included_duration_s: segments.included_duration(clip.frame_time()),
            segments: segments.ranges.clone(),
            segment_log: segments.log.clone(),
            left: summary(&events.left),
            right: summary(&events.right),
        }),
        notes: definition_notes(config.metrics.speed_window_s, config.metrics.speed_hop_s),
    };
    Ok(Analysis {
        signals,
        auto_events,
        auto_segments,
        events,
        segments,
        diagnostics,
        report,
    })
}
