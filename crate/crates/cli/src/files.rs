//! Reading analysis inputs from disk and writing outputs atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gaitscope::mocap::{read_annotations, sidecar_path};
use gaitscope::{parse_bvh, AnalysisConfig, AnnotationSidecar, MotionClip, ReportSource};

/// Clip identifier: the file name without its extension.
pub fn clip_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn load_clip(path: &Path) -> Result<MotionClip> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_bvh(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Reads a TOML config, or JSON when the extension is `.json`. With no
/// path the defaults apply.
pub fn load_config(path: Option<&Path>) -> Result<AnalysisConfig> {
    let Some(path) = path else {
        return Ok(AnalysisConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config = if has_extension(path, "json") {
        let c: AnalysisConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        c.validate().with_context(|| format!("validating {}", path.display()))?;
        c
    } else {
        AnalysisConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    Ok(config)
}

pub fn load_sidecar(path: &Path) -> Result<AnnotationSidecar> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_annotations(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Picks the sidecar for a clip: an explicit path wins, otherwise the
/// conventional sidecar next to the clip is used when it exists.
pub fn resolve_sidecar(clip: &Path, explicit: Option<&Path>, disabled: bool) -> Option<PathBuf> {
    if disabled {
        return None;
    }
    match explicit {
        Some(p) => Some(p.to_path_buf()),
        None => Some(sidecar_path(clip)).filter(|p| p.is_file()),
    }
}

/// Report source from the config, with the clip id defaulting to the file
/// stem.
pub fn report_source(config: &AnalysisConfig, clip: &Path, dataset: Option<&str>, style: Option<&str>) -> ReportSource {
    let mut source = config.source.clone();
    if source.clip_id.is_empty() {
        source.clip_id = clip_id(clip);
    }
    if let Some(d) = dataset {
        source.dataset = d.to_string();
    }
    if let Some(s) = style {
        source.style = s.to_string();
    }
    source
}

/// Writes `contents` to a temporary file in the same directory, then renames
/// it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}
