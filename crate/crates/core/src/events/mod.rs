//! Step and heel-strike detection from foot-height signals, ground-drift
//! diagnosis, and selection of steady straight-walking segments.

pub mod peaks;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mocap::{AnnotationError, AnnotationSidecar, Annotator, ExcludedRange};

#[derive(Debug, Error, PartialEq)]
pub enum EventsError {
    #[error("need at least {needed} step events, found {found}")]
    TooFewSteps { needed: usize, found: usize },
    #[error("need at least 2 gait cycles to assess ground drift, found {0}")]
    TooFewCycles(usize),
    #[error("no analyzable segment")]
    NoAnalyzableSegment { log: Vec<String> },
}

/// Inclusive frame range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameRange {
    pub start: usize,
    pub end: usize,
}

impl FrameRange {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, frame: usize) -> bool {
        (self.start..=self.end).contains(&frame)
    }

    /// Duration in seconds, counting each frame as one frame time.
    pub fn duration(&self, frame_time: f64) -> f64 {
        self.len() as f64 * frame_time
    }
}

/// Sorted, non-overlapping frame ranges retained for analysis, plus a log
/// of why frames were dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentSelection {
    pub ranges: Vec<FrameRange>,
    pub log: Vec<String>,
}

impl SegmentSelection {
    pub fn from_ranges(ranges: Vec<FrameRange>) -> Self {
        Self { ranges, log: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn contains(&self, frame: usize) -> bool {
        self.ranges.iter().any(|r| r.contains(frame))
    }

    pub fn included_duration(&self, frame_time: f64) -> f64 {
        self.ranges.iter().map(|r| r.duration(frame_time)).sum()
    }

    /// Index of the range containing `frame`.
    pub fn range_of(&self, frame: usize) -> Option<usize> {
        self.ranges.iter().position(|r| r.contains(frame))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventParams {
    /// Minimum peak prominence as a fraction of the 5th-95th percentile span.
    pub prominence_fraction: f64,
    /// Minimum time between two step events of one foot, in seconds.
    pub min_separation_s: f64,
    /// Heel strike is the first post-peak sample within this fraction of the
    /// cycle amplitude above the cycle minimum.
    pub heel_strike_epsilon: f64,
    /// Drift ratios above this mark heel strikes unreliable.
    pub drift_threshold: f64,
}

impl Default for EventParams {
    fn default() -> Self {
        Self {
            prominence_fraction: 0.25,
            min_separation_s: 0.4,
            heel_strike_epsilon: 0.05,
            drift_threshold: 0.2,
        }
    }
}

/// One step event per dominant foot-height peak.
pub fn count_steps(height: &[f64], frame_time: f64, params: &EventParams) -> Vec<usize> {
    let min_distance = (params.min_separation_s / frame_time).ceil() as usize;
    if height.len() < 3 || height.len() < min_distance {
        return Vec::new();
    }
    let span = peaks::percentile(height, 95.0) - peaks::percentile(height, 5.0);
    let floor = params.prominence_fraction * span;
    let candidates = peaks::local_maxima(height);
    let prom = peaks::prominences(height, &candidates);
    let kept: Vec<usize> = candidates
        .iter()
        .zip(prom)
        .filter(|&(_, p)| p > 0.0 && p >= floor)
        .map(|(&i, _)| i)
        .collect();
    peaks::select_by_distance(height, &kept, min_distance)
}

/// Spread of per-cycle minimum heights relative to the median cycle
/// amplitude. Cycles run from one step peak to the next.
pub fn assess_ground_drift(height: &[f64], steps: &[usize]) -> Result<f64, EventsError> {
    let cycles = steps.len().saturating_sub(1);
    if cycles < 2 {
        return Err(EventsError::TooFewCycles(cycles));
    }
    let mut minima = Vec::with_capacity(cycles);
    let mut amplitudes = Vec::with_capacity(cycles);
    for w in steps.windows(2) {
        let m = height[w[0]..=w[1]].iter().copied().fold(f64::INFINITY, f64::min);
        minima.push(m);
        amplitudes.push(height[w[0]] - m);
    }
    let spread = minima.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - minima.iter().copied().fold(f64::INFINITY, f64::min);
    amplitudes.sort_by(f64::total_cmp);
    let median = if cycles % 2 == 1 {
        amplitudes[cycles / 2]
    } else {
        0.5 * (amplitudes[cycles / 2 - 1] + amplitudes[cycles / 2])
    };
    if median <= 0.0 {
        return Ok(if spread > 0.0 { f64::INFINITY } else { 0.0 });
    }
    Ok(spread / median)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum HeelStrikeOutcome {
    Detected { frames: Vec<usize> },
    /// Ground level wanders too much for contact-phase detection.
    Refused { drift_ratio: f64 },
}

/// Phase-consistent heel strikes: after each step peak, the first sample
/// that descends to within `heel_strike_epsilon` of that cycle's amplitude
/// above the cycle minimum.
pub fn detect_heel_strikes(
    height: &[f64],
    steps: &[usize],
    params: &EventParams,
) -> Result<HeelStrikeOutcome, EventsError> {
    if steps.len() < 2 {
        return Err(EventsError::TooFewSteps { needed: 2, found: steps.len() });
    }
    let drift = match assess_ground_drift(height, steps) {
        Ok(r) => Some(r),
        Err(EventsError::TooFewCycles(_)) => None,
        Err(e) => return Err(e),
    };
    if let Some(r) = drift {
        if r > params.drift_threshold {
            return Ok(HeelStrikeOutcome::Refused { drift_ratio: r });
        }
    }
    let spacing = {
        let mut d: Vec<usize> = steps.windows(2).map(|w| w[1] - w[0]).collect();
        d.sort_unstable();
        d[d.len() / 2]
    };
    let mut frames = Vec::with_capacity(steps.len());
    let mut previous_baseline = None;
    for (k, &peak) in steps.iter().enumerate() {
        let (end, truncated) = match steps.get(k + 1) {
            Some(&next) => (next, false),
            None => {
                let want = peak + spacing;
                (want.min(height.len() - 1), want > height.len() - 1)
            }
        };
        let local_min = height[peak..=end].iter().copied().fold(f64::INFINITY, f64::min);
        // A clip that ends mid-swing has no trustworthy local baseline.
        let baseline = match (truncated, previous_baseline) {
            (true, Some(b)) => b,
            _ => local_min,
        };
        previous_baseline = Some(baseline);
        let amplitude = height[peak] - baseline;
        if amplitude <= 0.0 {
            continue;
        }
        let threshold = baseline + params.heel_strike_epsilon * amplitude;
        if let Some(off) = height[peak + 1..=end].iter().position(|&v| v <= threshold) {
            frames.push(peak + 1 + off);
        }
    }
    Ok(HeelStrikeOutcome::Detected { frames })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentParams {
    pub smoothing_window_s: f64,
    pub max_heading_rate_deg_s: f64,
    pub max_heading_change_deg: f64,
    pub heading_window_s: f64,
    pub min_segment_s: f64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            smoothing_window_s: 1.0,
            max_heading_rate_deg_s: 30.0,
            max_heading_change_deg: 45.0,
            heading_window_s: 2.0,
            min_segment_s: 1.5,
        }
    }
}

fn moving_average(x: &[Vector2<f64>], half: usize) -> Vec<Vector2<f64>> {
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(Vector2::zeros());
    for v in x {
        let last = *prefix.last().unwrap();
        prefix.push(last + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1) as f64
        })
        .collect()
}

/// Unwrapped horizontal heading (radians) of the smoothed velocity.
pub fn heading_series(root: &[Vector2<f64>], frame_time: f64, smoothing_window_s: f64) -> Vec<f64> {
    let n = root.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let velocity: Vec<Vector2<f64>> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (root[b] - root[a]) / ((b - a) as f64 * frame_time)
        })
        .collect();
    let half = ((smoothing_window_s / frame_time).round() as usize) / 2;
    let smooth = moving_average(&velocity, half);
    let mut heading = Vec::with_capacity(n);
    let mut prev: Option<f64> = None;
    for v in smooth {
        let raw = v.y.atan2(v.x);
        let h = match prev {
            None => raw,
            Some(p) => {
                let mut d = raw - p;
                d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
                p + d
            }
        };
        heading.push(h);
        prev = Some(h);
    }
    heading
}

fn push_runs(mask: &[bool], offset: usize, out: &mut Vec<FrameRange>) {
    let mut start = None;
    for (i, &m) in mask.iter().enumerate() {
        match (m, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(FrameRange::new(s + offset, i - 1 + offset));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(FrameRange::new(s + offset, mask.len() - 1 + offset));
    }
}

/// Keeps steady straight walking: drops sharp turns, trims the lead-in
/// before the first step event and the lead-out after the last one, and
/// discards ranges shorter than the minimum segment duration.
pub fn select_segments(
    root: &[Vector2<f64>],
    frame_time: f64,
    step_events: &[usize],
    params: &SegmentParams,
) -> Result<SegmentSelection, EventsError> {
    let mut log = Vec::new();
    let n = root.len();
    let (Some(&first), Some(&last)) = (step_events.iter().min(), step_events.iter().max()) else {
        log.push("no step events".to_string());
        return Err(EventsError::NoAnalyzableSegment { log });
    };
    if last == first {
        log.push("a single step event spans no time".to_string());
        return Err(EventsError::NoAnalyzableSegment { log });
    }

    let heading = heading_series(root, frame_time, params.smoothing_window_s);
    let rate: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            if a == b {
                0.0
            } else {
                (heading[b] - heading[a]).to_degrees() / ((b - a) as f64 * frame_time)
            }
        })
        .collect();
    let half_window = ((params.heading_window_s / frame_time).round() as usize) / 2;
    let mut keep = vec![true; n];
    let mut turning = vec![false; n];
    for i in 0..n {
        let lo = i.saturating_sub(half_window);
        let hi = (i + half_window).min(n - 1);
        let (mn, mx) = heading[lo..=hi]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &h| (a.min(h), b.max(h)));
        if rate[i].abs() > params.max_heading_rate_deg_s || (mx - mn).to_degrees() > params.max_heading_change_deg {
            turning[i] = true;
            keep[i] = false;
        }
    }
    let mut turns = Vec::new();
    push_runs(&turning, 0, &mut turns);
    for t in &turns {
        log.push(format!("excluded [{}, {}]: turning", t.start, t.end));
    }
    if first > 0 {
        log.push(format!("trimmed [0, {}]: before first step event", first - 1));
    }
    if last + 1 < n {
        log.push(format!("trimmed [{}, {}]: after last step event", last + 1, n - 1));
    }
    for (i, k) in keep.iter_mut().enumerate() {
        if i < first || i > last {
            *k = false;
        }
    }
    let mut candidates = Vec::new();
    push_runs(&keep, 0, &mut candidates);
    let mut ranges = Vec::new();
    for r in candidates {
        if r.duration(frame_time) < params.min_segment_s {
            log.push(format!(
                "dropped [{}, {}]: {:.2} s is shorter than {:.2} s",
                r.start,
                r.end,
                r.duration(frame_time),
                params.min_segment_s
            ));
        } else {
            ranges.push(r);
        }
    }
    if ranges.is_empty() {
        return Err(EventsError::NoAnalyzableSegment { log });
    }
    Ok(SegmentSelection { ranges, log })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Auto,
    Human,
}

impl From<Annotator> for Provenance {
    fn from(a: Annotator) -> Self {
        match a {
            Annotator::Auto => Provenance::Auto,
            Annotator::Human => Provenance::Human,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootEvents {
    /// Foot-height peak frames.
    pub steps: Vec<usize>,
    pub heel_strikes: HeelStrikes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum HeelStrikes {
    Available { frames: Vec<usize>, provenance: Provenance },
    /// Drift made automatic detection unreliable.
    Unreliable { drift_ratio: f64 },
    /// Too few step events to locate any gait cycle.
    Insufficient,
}

impl HeelStrikes {
    pub fn frames(&self) -> Option<&[usize]> {
        match self {
            HeelStrikes::Available { frames, .. } => Some(frames),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitEvents {
    pub left: FootEvents,
    pub right: FootEvents,
    /// Larger of the two feet's drift ratios, when assessable.
    pub drift_ratio: Option<f64>,
}

impl GaitEvents {
    /// Step events of both feet, sorted.
    pub fn all_steps(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.left.steps.iter().chain(&self.right.steps).copied().collect();
        all.sort_unstable();
        all
    }

    pub fn heel_strikes_unreliable(&self) -> bool {
        matches!(self.left.heel_strikes, HeelStrikes::Unreliable { .. })
            || matches!(self.right.heel_strikes, HeelStrikes::Unreliable { .. })
    }
}

/// Runs step counting and heel-strike detection on both feet. If either
/// foot's ground level drifts past the threshold, both feet are refused.
pub fn detect_events(left: &[f64], right: &[f64], frame_time: f64, params: &EventParams) -> GaitEvents {
    let steps = [count_steps(left, frame_time, params), count_steps(right, frame_time, params)];
    let drift: Vec<f64> = [left, right]
        .iter()
        .zip(&steps)
        .filter_map(|(h, s)| assess_ground_drift(h, s).ok())
        .collect();
    let drift_ratio = drift.iter().copied().reduce(f64::max);
    let refused = drift_ratio.is_some_and(|r| r > params.drift_threshold);
    let strikes = |h: &[f64], s: &[usize]| -> HeelStrikes {
        if let (true, Some(r)) = (refused, drift_ratio) {
            return HeelStrikes::Unreliable { drift_ratio: r };
        }
        match detect_heel_strikes(h, s, params) {
            Ok(HeelStrikeOutcome::Detected { frames }) => HeelStrikes::Available {
                frames,
                provenance: Provenance::Auto,
            },
            Ok(HeelStrikeOutcome::Refused { drift_ratio }) => HeelStrikes::Unreliable { drift_ratio },
            Err(_) => HeelStrikes::Insufficient,
        }
    };
    let [ls, rs] = steps;
    GaitEvents {
        left: FootEvents { heel_strikes: strikes(left, &ls), steps: ls },
        right: FootEvents { heel_strikes: strikes(right, &rs), steps: rs },
        drift_ratio,
    }
}

/// Overrides automatic heel strikes and segments with the sidecar's
/// non-empty entries, then cuts the sidecar's exclusion ranges out of the
/// resulting segments.
pub fn merge_annotations(
    auto: &GaitEvents,
    auto_segments: &SegmentSelection,
    sidecar: &AnnotationSidecar,
    frame_count: usize,
) -> Result<(GaitEvents, SegmentSelection), AnnotationError> {
    sidecar.validate_bounds(frame_count)?;
    let provenance = Provenance::from(sidecar.annotator);
    let mut events = auto.clone();
    for (foot, list) in [
        (&mut events.left, &sidecar.heel_strikes.left),
        (&mut events.right, &sidecar.heel_strikes.right),
    ] {
        if !list.is_empty() {
            foot.heel_strikes = HeelStrikes::Available {
                frames: list.clone(),
                provenance,
            };
        }
    }
    let segments = if sidecar.included_segments.is_empty() {
        auto_segments.clone()
    } else {
        SegmentSelection {
            ranges: sidecar
                .included_segments
                .iter()
                .map(|&[s, e]| FrameRange::new(s, e))
                .collect(),
            log: vec![format!("segments from {:?} annotation", sidecar.annotator).to_lowercase()],
        }
    };
    Ok((events, apply_exclusions(segments, &sidecar.exclusion_reasons)))
}

/// Removes annotated exclusion ranges from a selection and logs each one.
fn apply_exclusions(mut selection: SegmentSelection, exclusions: &[ExcludedRange]) -> SegmentSelection {
    for ex in exclusions {
        let [a, b] = ex.range;
        selection.ranges = selection
            .ranges
            .into_iter()
            .flat_map(|r| {
                if r.end < a || r.start > b {
                    return vec![r];
                }
                let mut kept = Vec::new();
                if r.start < a {
                    kept.push(FrameRange::new(r.start, a - 1));
                }
                if r.end > b {
                    kept.push(FrameRange::new(b + 1, r.end));
                }
                kept
            })
            .collect();
        selection.log.push(format!("excluded [{a}, {b}]: {}", ex.reason));
    }
    selection
}

/// Whether left and right heel strikes strictly alternate inside each
/// included segment.
pub fn heel_strikes_alternate(left: &[usize], right: &[usize], segments: &SegmentSelection) -> bool {
    segments.ranges.iter().all(|r| {
        let mut merged: Vec<(usize, bool)> = left
            .iter()
            .filter(|f| r.contains(**f))
            .map(|&f| (f, true))
            .chain(right.iter().filter(|f| r.contains(**f)).map(|&f| (f, false)))
            .collect();
        merged.sort_unstable();
        merged.windows(2).all(|w| w[0].1 != w[1].1 && w[0].0 != w[1].0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const DT: f64 = 1.0 / 60.0;

    #[test]
    fn constant_series_has_no_steps() {
        assert!(count_steps(&[0.3; 600], DT, &EventParams::default()).is_empty());
    }

    #[test]
    fn sinusoid_ten_periods_ten_steps() {
        // Period 1 s, sampled from trough to trough.
        let x: Vec<f64> = (0..=600).map(|i| -(2.0 * PI * i as f64 / 60.0).cos()).collect();
        assert_eq!(count_steps(&x, DT, &EventParams::default()).len(), 10);
    }

    #[test]
    fn short_series_yields_nothing() {
        assert!(count_steps(&[0.0, 1.0, 0.0], DT, &EventParams::default()).is_empty());
    }

    #[test]
    fn drift_ratio_arithmetic() {
        // Three cycles with amplitude 1: minima 0, 0, 0 then 0, 0.25, 0.5.
        let flat = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let steps = [0, 2, 4, 6];
        assert_eq!(assess_ground_drift(&flat, &steps).unwrap(), 0.0);
        let drifting = [1.0, 0.0, 1.25, 0.25, 1.5, 0.5, 1.5];
        assert_eq!(assess_ground_drift(&drifting, &steps).unwrap(), 0.5);
        assert_eq!(
            assess_ground_drift(&flat, &[0, 2]),
            Err(EventsError::TooFewCycles(1))
        );
    }

    #[test]
    fn rising_minima_are_refused() {
        let x: Vec<f64> = (0..600)
            .map(|i| {
                let t = i as f64 * DT;
                0.1 * (PI * t).sin().abs() + 0.02 * t
            })
            .collect();
        let p = EventParams::default();
        let steps = count_steps(&x, DT, &p);
        assert!(steps.len() >= 3);
        assert!(matches!(
            detect_heel_strikes(&x, &steps, &p).unwrap(),
            HeelStrikeOutcome::Refused { .. }
        ));
    }

    #[test]
    fn identical_cycles_have_equal_peak_to_strike_lag() {
        let cycle: Vec<f64> = (0..60)
            .map(|i| if i < 24 { (PI * i as f64 / 24.0).sin() } else { 0.0 })
            .collect();
        let x: Vec<f64> = cycle.iter().chain(&cycle).chain(&cycle).copied().collect();
        let p = EventParams::default();
        let steps = count_steps(&x, DT, &p);
        assert_eq!(steps.len(), 3);
        let HeelStrikeOutcome::Detected { frames } = detect_heel_strikes(&x, &steps, &p).unwrap() else {
            panic!("expected detection");
        };
        assert_eq!(frames.len(), 3);
        let lags: Vec<usize> = frames.iter().zip(&steps).map(|(h, s)| h - s).collect();
        assert!(lags.windows(2).all(|w| w[0] == w[1]), "{lags:?}");
    }

    #[test]
    fn stationary_clip_has_no_segment() {
        let root = vec![Vector2::new(0.0, 0.0); 300];
        assert!(matches!(
            select_segments(&root, DT, &[], &SegmentParams::default()),
            Err(EventsError::NoAnalyzableSegment { .. })
        ));
    }

    #[test]
    fn straight_walk_single_trimmed_segment() {
        let root: Vec<Vector2<f64>> = (0..1200).map(|i| Vector2::new(1.2 * i as f64 * DT, 0.0)).collect();
        let sel = select_segments(&root, DT, &[30, 500, 1150], &SegmentParams::default()).unwrap();
        assert_eq!(sel.ranges, vec![FrameRange::new(30, 1150)]);
    }

    #[test]
    fn short_remainders_are_dropped() {
        let root: Vec<Vector2<f64>> = (0..200).map(|i| Vector2::new(i as f64 * DT, 0.0)).collect();
        let err = select_segments(&root, DT, &[10, 60], &SegmentParams::default()).unwrap_err();
        let EventsError::NoAnalyzableSegment { log } = err else { panic!() };
        assert!(log.iter().any(|l| l.starts_with("dropped")));
    }

    fn auto_events() -> GaitEvents {
        GaitEvents {
            left: FootEvents {
                steps: vec![5, 65],
                heel_strikes: HeelStrikes::Available { frames: vec![20, 80], provenance: Provenance::Auto },
            },
            right: FootEvents {
                steps: vec![35, 95],
                heel_strikes: HeelStrikes::Unreliable { drift_ratio: 0.4 },
            },
            drift_ratio: Some(0.4),
        }
    }

    #[test]
    fn empty_sidecar_changes_nothing() {
        let auto = auto_events();
        let segs = SegmentSelection::from_ranges(vec![FrameRange::new(5, 95)]);
        let (e, s) = merge_annotations(&auto, &segs, &AnnotationSidecar::empty("c"), 100).unwrap();
        assert_eq!(e, auto);
        assert_eq!(s, segs);
    }

    #[test]
    fn sidecar_overrides_with_human_provenance() {
        let auto = auto_events();
        let segs = SegmentSelection::from_ranges(vec![FrameRange::new(5, 95)]);
        let mut side = AnnotationSidecar::empty("c");
        side.heel_strikes.left = vec![18, 79];
        side.heel_strikes.right = vec![48];
        side.included_segments = vec![[10, 60]];
        let (e, s) = merge_annotations(&auto, &segs, &side, 100).unwrap();
        assert_eq!(
            e.left.heel_strikes,
            HeelStrikes::Available { frames: vec![18, 79], provenance: Provenance::Human }
        );
        assert_eq!(e.right.heel_strikes.frames(), Some(&[48][..]));
        assert_eq!(s.ranges, vec![FrameRange::new(10, 60)]);
        side.heel_strikes.right = vec![100];
        assert!(merge_annotations(&auto, &segs, &side, 100).is_err());
    }

    #[test]
    fn exclusion_ranges_cut_the_selection() {
        let auto = auto_events();
        let segs = SegmentSelection::from_ranges(vec![FrameRange::new(5, 95)]);
        let mut side = AnnotationSidecar::empty("c");
        side.exclusion_reasons = vec![
            ExcludedRange { range: [30, 40], reason: "turn".into() },
            ExcludedRange { range: [0, 9], reason: "lead-in".into() },
        ];
        let (_, s) = merge_annotations(&auto, &segs, &side, 100).unwrap();
        assert_eq!(s.ranges, vec![FrameRange::new(10, 29), FrameRange::new(41, 95)]);
        assert_eq!(s.log, vec!["excluded [30, 40]: turn", "excluded [0, 9]: lead-in"]);
        side.included_segments = vec![[20, 35], [50, 60]];
        let (_, s) = merge_annotations(&auto, &segs, &side, 100).unwrap();
        assert_eq!(s.ranges, vec![FrameRange::new(20, 29), FrameRange::new(50, 60)]);
    }

    #[test]
    fn alternation_check() {
        let segs = SegmentSelection::from_ranges(vec![FrameRange::new(0, 100)]);
        assert!(heel_strikes_alternate(&[10, 50, 90], &[30, 70], &segs));
        assert!(!heel_strikes_alternate(&[10, 20, 90], &[30, 70], &segs));
    }
}
