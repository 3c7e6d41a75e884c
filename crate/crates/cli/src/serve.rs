//! Local HTTP service backing the annotation inspector.

use std::collections::{BTreeMap, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use gaitscope::mocap::{read_annotations, sidecar_path, write_annotations};
use gaitscope::{analyze_clip, Analysis, AnalysisConfig, AnnotationSidecar, ReportFormat};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::files::{clip_id, has_extension, load_clip, report_source, write_atomic};

pub struct AppState {
    dir: PathBuf,
    config: AnalysisConfig,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(dir: impl Into<PathBuf>, config: AnalysisConfig) -> Arc<Self> {
        Arc::new(Self {
            dir: dir.into(),
            config,
            locks: Mutex::new(HashMap::new()),
        })
    }

    /// BVH files directly inside the served directory, keyed by clip id.
    fn clips(&self) -> Result<BTreeMap<String, PathBuf>, ApiError> {
        let entries = std::fs::read_dir(&self.dir).map_err(|e| ApiError::internal(format!("listing clips: {e}")))?;
        Ok(entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && has_extension(p, "bvh"))
            .map(|p| (clip_id(&p), p))
            .collect())
    }

    fn clip_path(&self, id: &str) -> Result<PathBuf, ApiError> {
        self.clips()?
            .remove(id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no clip named {id:?}")))
    }

    fn lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClipEntry {
    pub id: String,
    pub file: String,
    pub has_annotations: bool,
}

/// Per-frame signals with automatic and effective events and segments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalsView {
    pub clip_id: String,
    pub frame_count: usize,
    pub frame_time: f64,
    pub spatial_unit: gaitscope::SpatialUnit,
    /// Names of the two horizontal axes, in the order of each `[a, b]` pair.
    pub horizontal_axes: [gaitscope::Axis; 2],
    pub equal_axis_units: bool,
    pub root: Vec<[f64; 2]>,
    pub left_foot: Vec<[f64; 2]>,
    pub right_foot: Vec<[f64; 2]>,
    pub left_foot_height: Vec<f64>,
    pub right_foot_height: Vec<f64>,
    pub left_knee_deg: Vec<f64>,
    pub right_knee_deg: Vec<f64>,
    pub auto_events: gaitscope::GaitEvents,
    pub auto_segments: gaitscope::SegmentSelection,
    pub events: gaitscope::GaitEvents,
    pub segments: gaitscope::SegmentSelection,
}

fn pairs<P: std::ops::Index<usize, Output = f64>>(points: &[P]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p[0], p[1]]).collect()
}

impl SignalsView {
    fn new(id: &str, a: Analysis, config: &AnalysisConfig, unit: gaitscope::SpatialUnit) -> Self {
        let (h1, h2) = config.up_axis.horizontal();
        let s = a.signals;
        Self {
            clip_id: id.to_string(),
            frame_count: s.root.len(),
            frame_time: s.frame_time,
            spatial_unit: unit,
            horizontal_axes: [h1, h2],
            equal_axis_units: true,
            root: pairs(&s.root),
            left_foot: pairs(&s.left_foot),
            right_foot: pairs(&s.right_foot),
            left_foot_height: s.left_foot_height,
            right_foot_height: s.right_foot_height,
            left_knee_deg: s.left_knee.degrees,
            right_knee_deg: s.right_knee.degrees,
            auto_events: a.auto_events,
            auto_segments: a.auto_segments,
            events: a.events,
            segments: a.segments,
        }
    }
}

pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/clips", get(list_clips))
        .route("/clips/{id}/signals", get(signals))
        .route("/clips/{id}/metrics", get(metrics))
        .route("/clips/{id}/annotations", get(get_annotations).put(put_annotations))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until interrupted.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn list_clips(State(state): State<Arc<AppState>>) -> Result<Json<Vec<ClipEntry>>, ApiError> {
    let clips = state.clips()?;
    Ok(Json(
        clips
            .into_iter()
            .map(|(id, path)| ClipEntry {
                has_annotations: sidecar_path(&path).is_file(),
                file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                id,
            })
            .collect(),
    ))
}

fn stored_sidecar(clip: &Path) -> Result<Option<(String, AnnotationSidecar)>, ApiError> {
    let path = sidecar_path(clip);
    match std::fs::read_to_string(&path) {
        Ok(text) => {
            let sidecar = read_annotations(&text)
                .map_err(|e| ApiError::invalid(format!("stored annotations are invalid: {e}")))?;
            Ok(Some((text, sidecar)))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(ApiError::internal(format!("reading annotations: {e}"))),
    }
}

/// Runs the analysis off the async runtime.
async fn analyze(
    state: &Arc<AppState>,
    id: &str,
    sidecar: Option<AnnotationSidecar>,
) -> Result<(Analysis, gaitscope::SpatialUnit), ApiError> {
    let path = state.clip_path(id)?;
    let state = state.clone();
    tokio::task::spawn_blocking(move || {
        let clip = load_clip(&path).map_err(|e| ApiError::invalid(format!("{e:#}")))?;
        let sidecar = match sidecar {
            Some(s) => Some(s),
            None => stored_sidecar(&path)?.map(|(_, s)| s),
        };
        let source = report_source(&state.config, &path, None, None);
        let analysis = analyze_clip(&clip, &state.config, sidecar.as_ref(), source)
            .map_err(|e| ApiError::invalid(e.to_string()))?;
        Ok((analysis, clip.spatial_unit().clone()))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn signals(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<SignalsView>, ApiError> {
    let (analysis, unit) = analyze(&state, &id, None).await?;
    Ok(Json(SignalsView::new(&id, analysis, &state.config, unit)))
}

#[derive(Debug, Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

async fn metrics(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<FormatQuery>,
) -> Result<Response, ApiError> {
    let format: ReportFormat = match q.format.as_deref() {
        Some(f) => f.parse().map_err(|e: gaitscope::report::ReportError| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?,
        None => ReportFormat::Json,
    };
    let (analysis, _) = analyze(&state, &id, None).await?;
    let body = analysis.report.render(format).map_err(|e| ApiError::internal(e.to_string()))?;
    let content_type = match format {
        ReportFormat::Csv => "text/csv",
        ReportFormat::Json => "application/json",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], body).into_response())
}

fn etag(text: &str) -> String {
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    format!("\"{:016x}\"", h.finish())
}

fn with_etag(body: String) -> Response {
    let tag = etag(&body);
    let mut response = ([(header::CONTENT_TYPE, "application/json")], body).into_response();
    if let Ok(v) = HeaderValue::from_str(&tag) {
        response.headers_mut().insert(header::ETAG, v);
    }
    response
}

async fn get_annotations(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let path = state.clip_path(&id)?;
    match stored_sidecar(&path)? {
        Some((text, _)) => Ok(with_etag(text)),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, format!("no annotations for {id:?}"))),
    }
}

/// Validates and stores a sidecar. With an `If-Match` header the write only
/// happens when the stored version still matches; otherwise the reply is 412.
async fn put_annotations(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let path = state.clip_path(&id)?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "body is not UTF-8"))?;
    let sidecar = read_annotations(text).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    if sidecar.clip_id != id {
        return Err(ApiError::invalid(format!(
            "sidecar names clip {:?} but was sent to {id:?}",
            sidecar.clip_id
        )));
    }
    let lock = state.lock(&id);
    let _guard = lock.lock().await;
    if let Some(expected) = headers.get(header::IF_MATCH) {
        let current = std::fs::read_to_string(sidecar_path(&path)).ok().map(|t| etag(&t));
        let matches = match (expected.to_str().unwrap_or_default(), current) {
            ("*", Some(_)) => true,
            (want, Some(have)) => want == have,
            (_, None) => false,
        };
        if !matches {
            return Err(ApiError::new(
                StatusCode::PRECONDITION_FAILED,
                "annotations changed since they were loaded",
            ));
        }
    }
    analyze(&state, &id, Some(sidecar.clone())).await?;
    let out = write_annotations(&sidecar);
    let target = sidecar_path(&path);
    tokio::task::spawn_blocking({
        let out = out.clone();
        move || write_atomic(&target, out.as_bytes())
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
    .map_err(|e| ApiError::internal(format!("saving annotations: {e}")))?;
    Ok(with_etag(out))
}
