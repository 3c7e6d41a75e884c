//! Motion-capture gait analysis from BVH clips through to old-style walking
//! fidelity verdicts, plus a catalog of surveyed locomotion datasets.

pub mod catalog;
pub mod config;
pub mod events;
pub mod fidelity;
pub mod kinematics;
pub mod metrics;
pub mod mocap;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use config::AnalysisConfig;
pub use events::{FrameRange, GaitEvents, SegmentSelection};
pub use fidelity::{compare_pair, render_report, ExpectedDirections, FidelityReport, Verdict};
pub use kinematics::{forward_kinematics, AngleSeries, JointTrajectory};
pub use metrics::{Availability, ExclusionReason, GaitMetrics, MetricId};
pub use mocap::{parse_bvh, write_bvh, AnnotationSidecar, Axis, MotionClip, Skeleton, SpatialUnit};
pub use pipeline::{analyze_clip, Analysis};
pub use report::{MetricsReport, ReportFormat, ReportSource};
