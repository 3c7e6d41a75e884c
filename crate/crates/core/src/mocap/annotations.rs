use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Extension appended to a clip's file name to locate its sidecar.
pub const SIDECAR_EXTENSION: &str = "annotations.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotator {
    Auto,
    Human,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FootStrikes {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcludedRange {
    pub range: [usize; 2],
    pub reason: String,
}

/// Human or automatic annotation for one clip: heel-strike frames per foot
/// and the frame ranges to analyze. Frame indices are 0-based and ranges
/// are inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationSidecar {
    pub clip_id: String,
    pub heel_strikes: FootStrikes,
    pub included_segments: Vec<[usize; 2]>,
    #[serde(default)]
    pub exclusion_reasons: Vec<ExcludedRange>,
    pub annotator: Annotator,
}

#[derive(Debug, Error, PartialEq)]
pub enum AnnotationError {
    #[error("malformed annotation document: {0}")]
    Malformed(String),
    #[error("{foot} heel strikes are not strictly increasing at position {position}")]
    NotIncreasing { foot: &'static str, position: usize },
    #[error("segment [{0}, {1}] ends before it starts")]
    InvertedSegment(usize, usize),
    #[error("segments [{0}, {1}] and [{2}, {3}] overlap or are out of order")]
    Overlap(usize, usize, usize, usize),
    #[error("{what} index {index} is outside a clip of {frames} frames")]
    OutOfBounds {
        what: &'static str,
        index: usize,
        frames: usize,
    },
}

impl AnnotationSidecar {
    /// An annotation with no heel strikes and no segment overrides.
    pub fn empty(clip_id: impl Into<String>) -> Self {
        Self {
            clip_id: clip_id.into(),
            heel_strikes: FootStrikes::default(),
            included_segments: Vec::new(),
            exclusion_reasons: Vec::new(),
            annotator: Annotator::Human,
        }
    }

    /// Checks the invariants that do not depend on the clip.
    pub fn validate(&self) -> Result<(), AnnotationError> {
        for (foot, list) in [("left", &self.heel_strikes.left), ("right", &self.heel_strikes.right)] {
            if let Some(k) = list.windows(2).position(|w| w[1] <= w[0]) {
                return Err(AnnotationError::NotIncreasing { foot, position: k + 1 });
            }
        }
        for &[s, e] in self
            .included_segments
            .iter()
            .chain(self.exclusion_reasons.iter().map(|r| &r.range))
        {
            if e < s {
                return Err(AnnotationError::InvertedSegment(s, e));
            }
        }
        for w in self.included_segments.windows(2) {
            let ([a0, a1], [b0, b1]) = (w[0], w[1]);
            if b0 <= a1 {
                return Err(AnnotationError::Overlap(a0, a1, b0, b1));
            }
        }
        Ok(())
    }

    /// Checks every index against a clip with `frames` frames.
    pub fn validate_bounds(&self, frames: usize) -> Result<(), AnnotationError> {
        self.validate()?;
        let strikes = self
            .heel_strikes
            .left
            .iter()
            .chain(&self.heel_strikes.right)
            .map(|&i| ("heel-strike", i));
        let ranges = self
            .included_segments
            .iter()
            .chain(self.exclusion_reasons.iter().map(|r| &r.range))
            .map(|r| ("segment", r[1]));
        for (what, index) in strikes.chain(ranges) {
            if index >= frames {
                return Err(AnnotationError::OutOfBounds { what, index, frames });
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.heel_strikes.left.is_empty()
            && self.heel_strikes.right.is_empty()
            && self.included_segments.is_empty()
    }
}

pub fn read_annotations(text: &str) -> Result<AnnotationSidecar, AnnotationError> {
    let sidecar: AnnotationSidecar =
        serde_json::from_str(text).map_err(|e| AnnotationError::Malformed(e.to_string()))?;
    sidecar.validate()?;
    Ok(sidecar)
}

pub fn write_annotations(sidecar: &AnnotationSidecar) -> String {
    let mut s = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    s.push('\n');
    s
}

/// Location of the sidecar for a clip file: the clip path with
/// `.annotations.json` appended.
pub fn sidecar_path(clip_path: &Path) -> PathBuf {
    let mut name = clip_path.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(SIDECAR_EXTENSION);
    clip_path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> AnnotationSidecar {
        AnnotationSidecar {
            clip_id: "walk_old_01".into(),
            heel_strikes: FootStrikes {
                left: vec![10, 55, 101],
                right: vec![33, 78],
            },
            included_segments: vec![[0, 120]],
            exclusion_reasons: vec![ExcludedRange {
                range: [121, 200],
                reason: "sharp turn".into(),
            }],
            annotator: Annotator::Human,
        }
    }

    #[test]
    fn round_trips_bit_identically() {
        let a = sample();
        let text = write_annotations(&a);
        let b = read_annotations(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, write_annotations(&b));
    }

    #[test]
    fn overlapping_segments_rejected() {
        let mut a = sample();
        a.included_segments = vec![[0, 100], [50, 200]];
        assert_eq!(a.validate(), Err(AnnotationError::Overlap(0, 100, 50, 200)));
        let text = write_annotations(&a);
        assert!(matches!(read_annotations(&text), Err(AnnotationError::Overlap(..))));
    }

    #[test]
    fn empty_strikes_with_full_segment_is_valid() {
        let mut a = AnnotationSidecar::empty("clip");
        a.included_segments = vec![[0, 299]];
        assert!(a.validate_bounds(300).is_ok());
        assert!(!a.is_empty());
    }

    #[test]
    fn bounds_and_ordering() {
        let a = sample();
        assert_eq!(
            a.validate_bounds(101),
            Err(AnnotationError::OutOfBounds { what: "heel-strike", index: 101, frames: 101 })
        );
        let mut b = sample();
        b.heel_strikes.left = vec![10, 10];
        assert_eq!(b.validate(), Err(AnnotationError::NotIncreasing { foot: "left", position: 1 }));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(read_annotations("{"), Err(AnnotationError::Malformed(_))));
        let text = r#"{"clip_id":"a","heel_strikes":{"left":[-1],"right":[]},"included_segments":[],"annotator":"human"}"#;
        assert!(matches!(read_annotations(text), Err(AnnotationError::Malformed(_))));
    }

    #[test]
    fn sidecar_sits_next_to_clip() {
        let p = sidecar_path(Path::new("/data/xia/old_walk.bvh"));
        assert_eq!(p, Path::new("/data/xia/old_walk.bvh.annotations.json"));
    }
}
