//! Directional verdicts for old-style versus normative walking metrics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{policy_exclusion, Diagnostics, ExclusionReason, MetricId, MetricParams, ProtocolFlags};
use crate::report::{MetricsReport, ReportError, ReportFormat};

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("cannot pair reports from different datasets: {old:?} and {normative:?}")]
    MismatchedPair { old: String, normative: String },
    #[error("cannot pair reports in different spatial units: {old} and {normative}")]
    MismatchedUnits { old: String, normative: String },
    #[error("tie tolerance must be finite and non-negative, got {0}")]
    Tolerance(f64),
    #[error("no diagnostics for dataset {0:?}")]
    MissingDiagnostics(String),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Variables assessed for age-related differences, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMetric {
    GaitSpeedMean,
    Cadence,
    StepWidthMean,
    StepLengthMean,
    GaitSpeedStd,
    StrideTimeVariability,
    StepLengthVariability,
    StepWidthVariability,
    KneeRom,
    AnkleRom,
    HipRom,
    AnkleAnglesAtEvents,
    DynamicBalance,
}

impl FidelityMetric {
    pub const ALL: [FidelityMetric; 13] = [
        FidelityMetric::GaitSpeedMean,
        FidelityMetric::Cadence,
        FidelityMetric::StepWidthMean,
        FidelityMetric::StepLengthMean,
        FidelityMetric::GaitSpeedStd,
        FidelityMetric::StrideTimeVariability,
        FidelityMetric::StepLengthVariability,
        FidelityMetric::StepWidthVariability,
        FidelityMetric::KneeRom,
        FidelityMetric::AnkleRom,
        FidelityMetric::HipRom,
        FidelityMetric::AnkleAnglesAtEvents,
        FidelityMetric::DynamicBalance,
    ];

    /// The computed metric this variable reads, if any.
    pub fn source(self) -> Option<MetricId> {
        Some(match self {
            FidelityMetric::GaitSpeedMean => MetricId::GaitSpeedMean,
            FidelityMetric::Cadence => MetricId::Cadence,
            FidelityMetric::StepWidthMean => MetricId::StepWidthMean,
            FidelityMetric::StepLengthMean => MetricId::StepLengthMean,
            FidelityMetric::GaitSpeedStd => MetricId::GaitSpeedStd,
            FidelityMetric::StrideTimeVariability => MetricId::StrideTimeStd,
            FidelityMetric::StepLengthVariability => MetricId::StepLengthStd,
            FidelityMetric::StepWidthVariability => MetricId::StepWidthStd,
            FidelityMetric::KneeRom => MetricId::KneeRom,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FidelityMetric::GaitSpeedMean => "gait_speed_mean",
            FidelityMetric::Cadence => "cadence",
            FidelityMetric::StepWidthMean => "step_width_mean",
            FidelityMetric::StepLengthMean => "step_length_mean",
            FidelityMetric::GaitSpeedStd => "gait_speed_std",
            FidelityMetric::StrideTimeVariability => "stride_time_variability",
            FidelityMetric::StepLengthVariability => "step_length_variability",
            FidelityMetric::StepWidthVariability => "step_width_variability",
            FidelityMetric::KneeRom => "knee_rom",
            FidelityMetric::AnkleRom => "ankle_rom",
            FidelityMetric::HipRom => "hip_rom",
            FidelityMetric::AnkleAnglesAtEvents => "ankle_angles_at_events",
            FidelityMetric::DynamicBalance => "dynamic_balance",
        }
    }
}

impl fmt::Display for FidelityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Smaller,
    Larger,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Smaller => "smaller",
            Direction::Larger => "larger",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Expect(Direction),
    Excluded(ExclusionReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpectedDirections(pub BTreeMap<FidelityMetric, Expectation>);

impl Default for ExpectedDirections {
    fn default() -> Self {
        use Direction::{Larger, Smaller};
        use Expectation::{Excluded, Expect};
        use FidelityMetric as M;
        Self(BTreeMap::from([
            (M::GaitSpeedMean, Expect(Smaller)),
            (M::Cadence, Expect(Smaller)),
            (M::StepWidthMean, Expect(Larger)),
            (M::StepLengthMean, Expect(Smaller)),
            (M::GaitSpeedStd, Expect(Larger)),
            (M::StrideTimeVariability, Excluded(ExclusionReason::DataScarcity)),
            (M::StepLengthVariability, Expect(Larger)),
            (M::StepWidthVariability, Expect(Larger)),
            (M::KneeRom, Expect(Smaller)),
            (M::AnkleRom, Excluded(ExclusionReason::InadequateAccuracy)),
            (M::HipRom, Excluded(ExclusionReason::InadequateAccuracy)),
            (M::AnkleAnglesAtEvents, Excluded(ExclusionReason::InadequateAccuracy)),
            (M::DynamicBalance, Excluded(ExclusionReason::InadequateAccuracy)),
        ]))
    }
}

impl ExpectedDirections {
    pub fn get(&self, metric: FidelityMetric) -> Expectation {
        self.0
            .get(&metric)
            .copied()
            .unwrap_or(Expectation::Excluded(ExclusionReason::InadequateAccuracy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    Smaller,
    Larger,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violation,
    Indistinguishable,
    Excluded(ExclusionReason),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Consistent => f.write_str("consistent"),
            Verdict::Violation => f.write_str("violation"),
            Verdict::Indistinguishable => f.write_str("indistinguishable"),
            Verdict::Excluded(r) => write!(f, "excluded: {r}"),
        }
    }
}

/// Verdict for a single pair of values.
pub fn judge(old: f64, normative: f64, expected: Direction, tolerance: f64) -> (Observed, Verdict) {
    if (old - normative).abs() <= tolerance * old.abs().max(normative.abs()) {
        return (Observed::Tie, Verdict::Indistinguishable);
    }
    let observed = if old < normative { Direction::Smaller } else { Direction::Larger };
    let verdict = if observed == expected { Verdict::Consistent } else { Verdict::Violation };
    let observed = match observed {
        Direction::Smaller => Observed::Smaller,
        Direction::Larger => Observed::Larger,
    };
    (observed, verdict)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRow {
    pub metric: FidelityMetric,
    pub old: Option<f64>,
    pub normative: Option<f64>,
    pub expected: Option<Direction>,
    pub observed: Option<Observed>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub consistent: usize,
    pub violation: usize,
    pub indistinguishable: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairIds {
    pub dataset: String,
    pub old_clip: String,
    pub normative_clip: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub pair: PairIds,
    pub tie_tolerance: f64,
    pub rows: Vec<FidelityRow>,
    pub summary: VerdictCounts,
}

impl FidelityReport {
    pub fn row(&self, metric: FidelityMetric) -> Option<&FidelityRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn violations(&self) -> Vec<FidelityMetric> {
        self.rows
            .iter()
            .filter(|r| r.verdict == Verdict::Violation)
            .map(|r| r.metric)
            .collect()
    }
}

/// Verdicts every variable of an old-style/normative pair.
pub fn compare_pair(
    old: &MetricsReport,
    normative: &MetricsReport,
    directions: &ExpectedDirections,
    tolerance: f64,
) -> Result<FidelityReport, FidelityError> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(FidelityError::Tolerance(tolerance));
    }
    if old.source.dataset != normative.source.dataset {
        return Err(FidelityError::MismatchedPair {
            old: old.source.dataset.clone(),
            normative: normative.source.dataset.clone(),
        });
    }
    if old.spatial_unit != normative.spatial_unit {
        return Err(FidelityError::MismatchedUnits {
            old: old.spatial_unit.to_string(),
            normative: normative.spatial_unit.to_string(),
        });
    }
    let mut summary = VerdictCounts::default();
    let rows = FidelityMetric::ALL
        .iter()
        .map(|&metric| {
            let availability = |r: &MetricsReport| metric.source().map(|id| r.metrics.get(id));
            let (a, b) = (availability(old), availability(normative));
            let old_value = a.and_then(|x| x.value());
            let norm_value = b.and_then(|x| x.value());
            let expectation = directions.get(metric);
            let unavailable = |x: Option<crate::metrics::Availability>| match x {
                Some(crate::metrics::Availability::Excluded(r)) => Some(r),
                None => Some(ExclusionReason::InadequateAccuracy),
                _ => None,
            };
            let (expected, observed, verdict) = match expectation {
                Expectation::Excluded(r) => (None, None, Verdict::Excluded(r)),
                Expectation::Expect(dir) => match (old_value, norm_value) {
                    (Some(o), Some(n)) => {
                        let (obs, v) = judge(o, n, dir, tolerance);
                        (Some(dir), Some(obs), v)
                    }
                    _ => {
                        let reason = unavailable(a).or(unavailable(b)).expect("one side unavailable");
                        (Some(dir), None, Verdict::Excluded(reason))
                    }
                },
            };
            match verdict {
                Verdict::Consistent => summary.consistent += 1,
                Verdict::Violation => summary.violation += 1,
                Verdict::Indistinguishable => summary.indistinguishable += 1,
                Verdict::Excluded(_) => summary.excluded += 1,
            }
            FidelityRow {
                metric,
                old: old_value,
                normative: norm_value,
                expected,
                observed,
                verdict,
            }
        })
        .collect();
    Ok(FidelityReport {
        pair: PairIds {
            dataset: old.source.dataset.clone(),
            old_clip: old.source.clip_id.clone(),
            normative_clip: normative.source.clip_id.clone(),
        },
        tie_tolerance: tolerance,
        rows,
        summary,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_report(report: &FidelityReport, format: ReportFormat) -> Result<String, FidelityError> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| FidelityError::Report(ReportError::Csv(e));
            w.write_record(["metric", "old", "normative", "expected", "observed", "verdict"])
                .map_err(io)?;
            for r in &report.rows {
                let observed = match r.observed {
                    Some(Observed::Smaller) => "smaller",
                    Some(Observed::Larger) => "larger",
                    Some(Observed::Tie) => "tie",
                    None => "",
                };
                let verdict = match r.verdict {
                    Verdict::Violation => "VIOLATION".to_string(),
                    v => v.to_string(),
                };
                w.write_record([
                    r.metric.as_str(),
                    &cell(r.old),
                    &cell(r.normative),
                    r.expected.map_or("", Direction::as_str),
                    observed,
                    &verdict,
                ])
                .map_err(io)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| io(e.into_error().into()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

/// Whether a variable enters the comparison for a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inclusion {
    Included,
    Excluded(ExclusionReason),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub diagnostics: Option<Diagnostics>,
    pub flags: ProtocolFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionColumn {
    pub dataset: String,
    pub cells: BTreeMap<FidelityMetric, Inclusion>,
}

/// Per-dataset include/exclude decision for every variable.
pub fn dataset_inclusion_matrix(
    datasets: &[DatasetEntry],
    directions: &ExpectedDirections,
    params: &MetricParams,
) -> Result<Vec<InclusionColumn>, FidelityError> {
    datasets
        .iter()
        .map(|d| {
            let diagnostics = d
                .diagnostics
                .ok_or_else(|| FidelityError::MissingDiagnostics(d.name.clone()))?;
            let cells = FidelityMetric::ALL
                .iter()
                .map(|&m| {
                    let inclusion = match (directions.get(m), m.source()) {
                        (Expectation::Excluded(r), _) => Inclusion::Excluded(r),
                        (_, None) => Inclusion::Excluded(ExclusionReason::InadequateAccuracy),
                        (Expectation::Expect(_), Some(id)) => policy_exclusion(id, &diagnostics, &d.flags, params)
                            .map_or(Inclusion::Included, Inclusion::Excluded),
                    };
                    (m, inclusion)
                })
                .collect();
            Ok(InclusionColumn {
                dataset: d.name.clone(),
                cells,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{Availability, GaitMetrics};
    use crate::report::ReportSource;

    fn report(dataset: &str, values: &[(MetricId, f64)]) -> MetricsReport {
        let mut metrics = GaitMetrics::all_excluded(ExclusionReason::ProtocolDependence);
        for &(id, v) in values {
            metrics.0.insert(id, Availability::Value(v));
        }
        MetricsReport {
            source: ReportSource {
                clip_id: format!("{dataset}-clip"),
                dataset: dataset.into(),
                style: String::new(),
            },
            spatial_unit: Default::default(),
            metrics,
            diagnostics: None,
            notes: vec![],
        }
    }

    #[test]
    fn tie_tolerance_boundary() {
        assert_eq!(judge(1.0, 1.02, Direction::Smaller, 0.02).1, Verdict::Indistinguishable);
        assert_eq!(judge(1.0, 1.03, Direction::Smaller, 0.02).1, Verdict::Consistent);
        assert_eq!(judge(1.03, 1.0, Direction::Smaller, 0.02).1, Verdict::Violation);
        assert_eq!(judge(0.0, 0.0, Direction::Larger, 0.0).1, Verdict::Indistinguishable);
    }

    #[test]
    fn identical_sets_are_indistinguishable() {
        let r = report("x", &[(MetricId::GaitSpeedMean, 1.2), (MetricId::KneeRom, 40.0)]);
        let f = compare_pair(&r, &r, &ExpectedDirections::default(), 0.02).unwrap();
        assert_eq!(f.summary.indistinguishable, 2);
        assert_eq!(f.summary.consistent + f.summary.violation, 0);
        assert_eq!(f.rows.len(), 13);
    }

    #[test]
    fn mismatched_datasets_refused() {
        let a = report("xia", &[]);
        let b = report("cmu", &[]);
        assert!(matches!(
            compare_pair(&a, &b, &ExpectedDirections::default(), 0.02),
            Err(FidelityError::MismatchedPair { .. })
        ));
    }

    #[test]
    fn exclusion_only_report_renders() {
        let r = report("x", &[]);
        let f = compare_pair(&r, &r, &ExpectedDirections::default(), 0.02).unwrap();
        assert_eq!(f.summary.excluded, 13);
        let csv = render_report(&f, ReportFormat::Csv).unwrap();
        assert!(csv.starts_with("metric,old,normative,expected,observed,verdict\n"));
        assert!(csv.contains("gait_speed_mean,,,smaller,,excluded: protocol dependence"));
        assert!(csv.contains("hip_rom,,,,,excluded: inadequate accuracy"));
        assert_eq!(csv, render_report(&f, ReportFormat::Csv).unwrap());
    }

    #[test]
    fn missing_diagnostics() {
        let d = [DatasetEntry {
            name: "x".into(),
            diagnostics: None,
            flags: ProtocolFlags::default(),
        }];
        assert!(matches!(
            dataset_inclusion_matrix(&d, &ExpectedDirections::default(), &MetricParams::default()),
            Err(FidelityError::MissingDiagnostics(_))
        ));
    }
}
