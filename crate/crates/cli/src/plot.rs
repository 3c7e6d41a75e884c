//! Per-frame tables for plot export, one layout per plot kind, with event
//! marker columns.

use std::fmt::Write as _;

use anyhow::Result;
use gaitscope::{Analysis, Axis, SpatialUnit};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Trajectory,
    FootHeight,
    KneeAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotTable {
    pub kind: PlotKind,
    pub clip_id: String,
    pub spatial_unit: SpatialUnit,
    pub frame_time: f64,
    /// Trajectory plots must draw both horizontal axes at the same scale.
    pub equal_axis_units: bool,
    pub notes: Vec<String>,
    pub columns: Vec<Column>,
}

fn column(name: impl Into<String>, values: Vec<f64>) -> Column {
    Column {
        name: name.into(),
        values,
    }
}

fn markers(frames: usize, hits: &[usize]) -> Vec<f64> {
    let mut v = vec![0.0; frames];
    for &f in hits {
        if f < frames {
            v[f] = 1.0;
        }
    }
    v
}

fn axis_label(a: Axis) -> &'static str {
    match a {
        Axis::X => "x",
        Axis::Y => "y",
        Axis::Z => "z",
    }
}

pub fn plot_table(kind: PlotKind, analysis: &Analysis, clip_id: &str, unit: &SpatialUnit, up: Axis) -> PlotTable {
    let s = &analysis.signals;
    let n = s.root.len();
    let ev = &analysis.events;
    let strikes = |f: &gaitscope::events::FootEvents| markers(n, f.heel_strikes.frames().unwrap_or(&[]));
    let included: Vec<f64> = (0..n).map(|f| if analysis.segments.contains(f) { 1.0 } else { 0.0 }).collect();
    let mut columns = vec![
        column("frame", (0..n).map(|f| f as f64).collect()),
        column("time_s", (0..n).map(|f| f as f64 * s.frame_time).collect()),
    ];
    let mut notes = Vec::new();
    match kind {
        PlotKind::Trajectory => {
            let (a, b) = up.horizontal();
            for (name, path) in [("root", &s.root), ("left_foot", &s.left_foot), ("right_foot", &s.right_foot)] {
                columns.push(column(format!("{name}_{}", axis_label(a)), path.iter().map(|p| p.x).collect()));
                columns.push(column(format!("{name}_{}", axis_label(b)), path.iter().map(|p| p.y).collect()));
            }
            notes.push(format!(
                "plot {} against {} with equal axis units",
                axis_label(b),
                axis_label(a)
            ));
        }
        PlotKind::FootHeight => {
            columns.push(column("left_foot_height", s.left_foot_height.clone()));
            columns.push(column("right_foot_height", s.right_foot_height.clone()));
            columns.push(column("left_step", markers(n, &ev.left.steps)));
            columns.push(column("right_step", markers(n, &ev.right.steps)));
        }
        PlotKind::KneeAngle => {
            columns.push(column("left_knee_deg", s.left_knee.degrees.clone()));
            columns.push(column("right_knee_deg", s.right_knee.degrees.clone()));
        }
    }
    columns.push(column("left_heel_strike", strikes(&ev.left)));
    columns.push(column("right_heel_strike", strikes(&ev.right)));
    columns.push(column("included", included));
    if ev.heel_strikes_unreliable() {
        notes.push("heel strikes unreliable: ground-level drift".into());
    }
    PlotTable {
        kind,
        clip_id: clip_id.to_string(),
        spatial_unit: unit.clone(),
        frame_time: s.frame_time,
        equal_axis_units: kind == PlotKind::Trajectory,
        notes,
        columns,
    }
}

impl PlotTable {
    /// CSV with `#` comment lines carrying the metadata.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        let kind = serde_json::to_value(self.kind)?;
        writeln!(out, "# kind: {}", kind.as_str().unwrap_or_default())?;
        writeln!(out, "# clip_id: {}", self.clip_id)?;
        writeln!(out, "# spatial_unit: {}", self.spatial_unit)?;
        writeln!(out, "# frame_time: {}", self.frame_time)?;
        writeln!(out, "# equal_axis_units: {}", self.equal_axis_units)?;
        for note in &self.notes {
            writeln!(out, "# note: {note}")?;
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        let rows = self.columns.first().map_or(0, |c| c.values.len());
        for r in 0..rows {
            w.write_record(self.columns.iter().map(|c| c.values[r].to_string()))?;
        }
        out.push_str(&String::from_utf8(w.into_inner()?)?);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
