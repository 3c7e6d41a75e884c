//! Analysis configuration: the joint-name mapping plus every threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{EventParams, SegmentParams};
use crate::metrics::{MetricParams, ProtocolFlags};
use crate::mocap::{Axis, Skeleton};
use crate::report::ReportSource;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Malformed(String),
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must lie in (0, 1), got {value}")]
    Fraction { name: &'static str, value: f64 },
    #[error("joint {name:?} mapped as {role} is not in the skeleton")]
    UnknownJoint { role: String, name: String },
    #[error("joint {0:?} has no end site but use_end_site is set")]
    NoEndSite(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegJoints {
    pub hip: String,
    pub knee: String,
    pub ankle: String,
    /// Joint whose height and position define foot contact.
    pub foot: String,
}

impl LegJoints {
    fn named(side: &str) -> Self {
        Self {
            hip: format!("{side}UpLeg"),
            knee: format!("{side}Leg"),
            ankle: format!("{side}Foot"),
            foot: format!("{side}Foot"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JointMap {
    pub root: String,
    pub left: LegJoints,
    pub right: LegJoints,
}

impl Default for JointMap {
    fn default() -> Self {
        Self {
            root: "Hips".into(),
            left: LegJoints::named("Left"),
            right: LegJoints::named("Right"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FidelityParams {
    /// Relative difference at or below which two values count as equal.
    pub tie_tolerance: f64,
}

impl Default for FidelityParams {
    fn default() -> Self {
        Self { tie_tolerance: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub joints: JointMap,
    pub up_axis: Axis,
    pub use_end_site: bool,
    pub events: EventParams,
    pub segments: SegmentParams,
    pub metrics: MetricParams,
    pub fidelity: FidelityParams,
    pub protocol: ProtocolFlags,
    /// Dataset and style labels stamped on reports. The clip identifier
    /// defaults to the file stem.
    pub source: ReportSource,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            joints: JointMap::default(),
            up_axis: Axis::Y,
            use_end_site: false,
            events: EventParams::default(),
            segments: SegmentParams::default(),
            metrics: MetricParams::default(),
            fidelity: FidelityParams::default(),
            protocol: ProtocolFlags::default(),
            source: ReportSource::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("events.prominence_fraction", self.events.prominence_fraction),
            ("events.min_separation_s", self.events.min_separation_s),
            ("events.drift_threshold", self.events.drift_threshold),
            ("segments.smoothing_window_s", self.segments.smoothing_window_s),
            ("segments.max_heading_rate_deg_s", self.segments.max_heading_rate_deg_s),
            ("segments.max_heading_change_deg", self.segments.max_heading_change_deg),
            ("segments.heading_window_s", self.segments.heading_window_s),
            ("segments.min_segment_s", self.segments.min_segment_s),
            ("metrics.speed_window_s", self.metrics.speed_window_s),
            ("metrics.speed_hop_s", self.metrics.speed_hop_s),
            ("metrics.min_direction_segment_s", self.metrics.min_direction_segment_s),
            ("metrics.min_cycles_for_variability", self.metrics.min_cycles_for_variability as f64),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::NotPositive { name, value });
            }
        }
        let eps = self.events.heel_strike_epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(ConfigError::Fraction {
                name: "events.heel_strike_epsilon",
                value: eps,
            });
        }
        let tol = self.fidelity.tie_tolerance;
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(ConfigError::NotPositive {
                name: "fidelity.tie_tolerance",
                value: tol,
            });
        }
        Ok(())
    }

    /// Checks that every mapped joint exists in `skeleton`.
    pub fn bind(&self, skeleton: &Skeleton) -> Result<(), ConfigError> {
        let j = &self.joints;
        let roles = [
            ("root", &j.root),
            ("left hip", &j.left.hip),
            ("left knee", &j.left.knee),
            ("left ankle", &j.left.ankle),
            ("left foot", &j.left.foot),
            ("right hip", &j.right.hip),
            ("right knee", &j.right.knee),
            ("right ankle", &j.right.ankle),
            ("right foot", &j.right.foot),
        ];
        for (role, name) in roles {
            if skeleton.joint(name).is_none() {
                return Err(ConfigError::UnknownJoint {
                    role: role.into(),
                    name: name.clone(),
                });
            }
        }
        if self.use_end_site {
            for foot in [&j.left.foot, &j.right.foot] {
                if skeleton.joint(foot).and_then(|x| x.end_site).is_none() {
                    return Err(ConfigError::NoEndSite(foot.clone()));
                }
            }
        }
        Ok(())
    }
}
