//! Serialized per-clip metrics report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{FrameRange, Provenance};
use crate::metrics::{Availability, GaitMetrics, MetricId};
use crate::mocap::SpatialUnit;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown report format {0:?}, expected csv or json")]
    UnknownFormat(String),
    #[error("malformed metrics report: {0}")]
    Malformed(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    #[default]
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

/// Identifies where a metric set came from. Old/normative pairs must share
/// a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportSource {
    pub clip_id: String,
    pub dataset: String,
    pub style: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootSummary {
    pub step_events: usize,
    pub heel_strikes: Option<usize>,
    pub heel_strike_provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDiagnostics {
    pub frame_count: usize,
    pub frame_time: f64,
    pub drift_ratio: Option<f64>,
    pub heel_strikes_reliable: bool,
    pub gait_cycles: usize,
    pub included_duration_s: f64,
    pub segments: Vec<FrameRange>,
    pub segment_log: Vec<String>,
    pub left: FootSummary,
    pub right: FootSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub source: ReportSource,
    #[serde(default)]
    pub spatial_unit: SpatialUnit,
    pub metrics: GaitMetrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<ReportDiagnostics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Definitions that the numbers depend on, attached to every report.
pub fn definition_notes(speed_window_s: f64, speed_hop_s: f64) -> Vec<String> {
    vec![
        format!(
            "gait_speed_std is the population standard deviation across {speed_window_s} s windows with {speed_hop_s} s hop"
        ),
        "knee_rom is the mean of knee_rom_left and knee_rom_right".into(),
        "knee flexion is 180 deg minus the hip-knee-ankle interior angle".into(),
        "step_length_std doubles as step length variability".into(),
    ]
}

impl MetricsReport {
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Malformed(e.to_string()))
    }

    pub fn render(&self, format: ReportFormat) -> Result<String, ReportError> {
        match format {
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                Ok(s)
            }
            ReportFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["metric", "value", "unit", "status"])?;
                for id in MetricId::ALL {
                    let unit = id.unit(&self.spatial_unit);
                    match self.metrics.get(id) {
                        Availability::Value(v) => w.write_record([id.as_str(), &v.to_string(), &unit, "included"])?,
                        Availability::Excluded(r) => {
                            w.write_record([id.as_str(), "", &unit, &format!("excluded: {r}")])?
                        }
                    }
                }
                let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ExclusionReason;

    fn sample() -> MetricsReport {
        let mut metrics = GaitMetrics::all_excluded(ExclusionReason::DataScarcity);
        metrics.0.insert(MetricId::Cadence, Availability::Value(110.5));
        MetricsReport {
            source: ReportSource {
                clip_id: "walk".into(),
                dataset: "synthetic".into(),
                style: "normative".into(),
            },
            spatial_unit: SpatialUnit::Meters,
            metrics,
            diagnostics: None,
            notes: vec![],
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let text = r.render(ReportFormat::Json).unwrap();
        assert_eq!(MetricsReport::from_json(&text).unwrap(), r);
    }

    #[test]
    fn csv_lists_every_metric() {
        let text = sample().render(ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "metric,value,unit,status");
        assert_eq!(lines.len(), 1 + MetricId::ALL.len());
        assert!(lines.contains(&"cadence,110.5,steps/min,included"));
        assert!(lines.contains(&"gait_speed_mean,,meters/s,excluded: data scarcity"));
    }

    #[test]
    fn unknown_format() {
        assert!(matches!("xml".parse::<ReportFormat>(), Err(ReportError::UnknownFormat(_))));
        assert_eq!("CSV".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
    }
}
