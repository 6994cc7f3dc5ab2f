//! HTTP service over a loaded graph and profile set.
//!
//! Every response carries the data version (a hash of the loaded artifacts)
//! in the `x-data-version` header; JSON bodies repeat it as `version`.

use std::collections::{BTreeMap, HashMap};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderName, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use geojson::FeatureCollection;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use crate::error::Error;
use crate::geo::GeoPoint;
use crate::graph::{GraphDocument, SidewalkGraph, DEFAULT_MAX_SNAP_M, DEFAULT_MERGE_EPS_M};
use crate::profiles::{
    customize_profile, load_profiles, save_profiles, GroupProfile, LabelWeighting, ProfileError, SHORTEST_PROFILE_ID,
};
use crate::routing::{compare_routes, route, routes_geojson, RouteError, RouteOptions, DEFAULT_ROUTE_SNAP_M};
use crate::scoring::{
    compute_normalizer_with, neighborhood_scores_geojson, neighborhood_scores_with, parse_neighborhoods,
    segment_scores_geojson, segment_scores_with, Neighborhood, DEFAULT_PERCENTILE,
};
use crate::survey::BarrierLabelType;

pub const VERSION_HEADER: &str = "x-data-version";

fn default_port() -> u16 {
    8080
}

fn default_bind() -> IpAddr {
    IpAddr::V4(Ipv4Addr::LOCALHOST)
}

fn default_percentile() -> f64 {
    DEFAULT_PERCENTILE
}

fn default_merge() -> f64 {
    DEFAULT_MERGE_EPS_M
}

fn default_snap() -> f64 {
    DEFAULT_MAX_SNAP_M
}

fn default_route_snap() -> f64 {
    DEFAULT_ROUTE_SNAP_M
}

/// Contents of the `serve --config` file (TOML). Relative paths resolve
/// against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_bind")]
    pub bind: IpAddr,
    pub graph: PathBuf,
    pub profiles: PathBuf,
    #[serde(default)]
    pub neighborhoods: Option<PathBuf>,
    #[serde(default = "default_percentile")]
    pub normalizer_percentile: f64,
    /// Recorded with the graph build; the service reports it in /health.
    #[serde(default = "default_merge")]
    pub merge_eps_m: f64,
    #[serde(default = "default_snap")]
    pub snap_max_m: f64,
    /// Maximum distance from a route endpoint to its nearest node.
    #[serde(default = "default_route_snap")]
    pub route_snap_max_m: f64,
    #[serde(default)]
    pub cors_allowlist: Vec<String>,
    #[serde(default)]
    pub severity_weighting: bool,
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    /// When set, custom profiles are loaded from and written back to this
    /// file.
    #[serde(default)]
    pub custom_profiles_file: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<ServiceConfig, Error> {
        let mut config: ServiceConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut config.graph);
        resolve(&mut config.profiles);
        for p in [
            &mut config.neighborhoods,
            &mut config.static_dir,
            &mut config.custom_profiles_file,
        ]
        .into_iter()
        .flatten()
        {
            resolve(p);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ServiceConfig, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        ServiceConfig::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [
            ("merge_eps_m", self.merge_eps_m),
            ("snap_max_m", self.snap_max_m),
            ("route_snap_max_m", self.route_snap_max_m),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be a finite distance >= 0, got {v}")));
            }
        }
        if !(self.normalizer_percentile > 0.0 && self.normalizer_percentile <= 100.0) {
            return Err(Error::Config(format!(
                "normalizer_percentile must be in (0, 100], got {}",
                self.normalizer_percentile
            )));
        }
        if self.port == 0 {
            return Err(Error::Config("port must be in 1-65535".into()));
        }
        for origin in &self.cors_allowlist {
            HeaderValue::from_str(origin).map_err(|_| Error::Config(format!("bad CORS origin `{origin}`")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceOptions {
    pub percentile: f64,
    pub route_snap_max_m: f64,
    pub weighting: LabelWeighting,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            percentile: DEFAULT_PERCENTILE,
            route_snap_max_m: DEFAULT_ROUTE_SNAP_M,
            weighting: LabelWeighting::TypeLevel,
        }
    }
}

/// Immutable artifacts plus the custom-profile registry.
pub struct AppState {
    graph: SidewalkGraph,
    profiles: Vec<GroupProfile>,
    neighborhoods: Option<Vec<Neighborhood>>,
    options: ServiceOptions,
    version: String,
    custom: RwLock<BTreeMap<String, GroupProfile>>,
    custom_file: Option<PathBuf>,
}

/// Short content hash over the given artifacts, in order.
pub fn data_version<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    hex::encode(&hasher.finalize()[..8])
}

impl AppState {
    pub fn new(
        graph: SidewalkGraph,
        profiles: Vec<GroupProfile>,
        neighborhoods: Option<Vec<Neighborhood>>,
        options: ServiceOptions,
        version: String,
    ) -> AppState {
        AppState {
            graph,
            profiles,
            neighborhoods,
            options,
            version,
            custom: RwLock::new(BTreeMap::new()),
            custom_file: None,
        }
    }

    pub fn load(config: &ServiceConfig) -> Result<AppState, Error> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e));
        let graph_text = read(&config.graph)?;
        let profiles_text = read(&config.profiles)?;
        let graph = GraphDocument::from_json(&graph_text)?.to_graph()?;
        let profiles = load_profiles(&profiles_text)?;
        if profiles.iter().any(|p| p.profile_id == SHORTEST_PROFILE_ID) {
            return Err(ProfileError::DuplicateId(SHORTEST_PROFILE_ID.into()).into());
        }
        let (neighborhoods, hood_text) = match &config.neighborhoods {
            Some(p) => {
                let text = read(p)?;
                (Some(parse_neighborhoods(&text)?), text)
            }
            None => (None, String::new()),
        };
        let version = data_version([graph_text.as_bytes(), profiles_text.as_bytes(), hood_text.as_bytes()]);
        let options = ServiceOptions {
            percentile: config.normalizer_percentile,
            route_snap_max_m: config.route_snap_max_m,
            weighting: if config.severity_weighting {
                LabelWeighting::SeverityScaled
            } else {
                LabelWeighting::TypeLevel
            },
        };
        let mut state = AppState::new(graph, profiles, neighborhoods, options, version);
        if let Some(path) = &config.custom_profiles_file {
            if path.exists() {
                let customs = load_profiles(&read(path)?)?;
                let mut registry = state.custom.write().expect("registry lock");
                for p in customs {
                    if state.profiles.iter().any(|q| q.profile_id == p.profile_id)
                        || p.profile_id == SHORTEST_PROFILE_ID
                    {
                        return Err(ProfileError::DuplicateId(p.profile_id).into());
                    }
                    registry.insert(p.profile_id.clone(), p);
                }
            }
            state.custom_file = Some(path.clone());
        }
        Ok(state)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn graph(&self) -> &SidewalkGraph {
        &self.graph
    }

    fn lookup(&self, id: &str) -> Option<GroupProfile> {
        if id == SHORTEST_PROFILE_ID {
            return Some(GroupProfile::shortest());
        }
        self.profiles
            .iter()
            .find(|p| p.profile_id == id)
            .cloned()
            .or_else(|| self.custom.read().expect("registry lock").get(id).cloned())
    }
}

type Shared = Arc<AppState>;

struct ApiError {
    status: StatusCode,
    kind: &'static str,
    module: &'static str,
    message: String,
    path: Option<String>,
}

impl ApiError {
    fn bad_request(kind: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind,
            module: "interface",
            message: message.into(),
            path: None,
        }
    }

    fn unknown_profile(id: &str) -> ApiError {
        ApiError {
            status: StatusCode::NOT_FOUND,
            kind: "unknown_profile",
            module: "profiles",
            message: format!("unknown profile `{id}`"),
            path: None,
        }
    }

    fn with_path(mut self, path: impl Into<String>) -> ApiError {
        self.path = Some(path.into());
        self
    }
}

impl From<RouteError> for ApiError {
    fn from(e: RouteError) -> ApiError {
        let status = match e {
            RouteError::InvalidSnapDistance(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError {
            status,
            kind: e.kind(),
            module: "routing",
            message: e.to_string(),
            path: None,
        }
    }
}

struct Reply {
    status: StatusCode,
    body: Value,
}

fn ok(body: Value) -> Reply {
    Reply {
        status: StatusCode::OK,
        body,
    }
}

fn finish(state: &AppState, result: Result<Reply, ApiError>) -> Response {
    let (status, mut body) = match result {
        Ok(r) => (r.status, r.body),
        Err(e) => {
            let mut err = json!({ "kind": e.kind, "module": e.module, "message": e.message });
            if let Some(p) = e.path {
                err["path"] = p.into();
            }
            (e.status, json!({ "error": err }))
        }
    };
    if let Value::Object(map) = &mut body {
        map.insert("version".into(), state.version.clone().into());
    }
    (status, Json(body)).into_response()
}

fn collection_body(fc: FeatureCollection, extra: Value) -> Value {
    let mut body = serde_json::to_value(fc).expect("feature collection serializes");
    if let (Value::Object(map), Value::Object(extra)) = (&mut body, extra) {
        map.extend(extra);
    }
    body
}

fn required<'a>(q: &'a HashMap<String, String>, key: &str) -> Result<&'a str, ApiError> {
    q.get(key).map(String::as_str).filter(|v| !v.is_empty()).ok_or_else(|| {
        ApiError::bad_request("missing_parameter", format!("missing query parameter `{key}`")).with_path(key)
    })
}

fn point_param(q: &HashMap<String, String>, key: &str) -> Result<GeoPoint, ApiError> {
    required(q, key)?
        .parse::<GeoPoint>()
        .map_err(|m| ApiError::bad_request("invalid_parameter", format!("{key}: {m}")).with_path(key))
}

fn profile_param(state: &AppState, id: &str) -> Result<GroupProfile, ApiError> {
    state.lookup(id).ok_or_else(|| ApiError::unknown_profile(id))
}

async fn health(State(state): State<Shared>) -> Response {
    let g = &state.graph;
    let body = json!({
        "status": "ok",
        "nodes": g.nodes().len(),
        "edges": g.edges().len(),
        "labels": g.label_count(),
        "components": g.component_count(),
        "profiles": state.profiles.len(),
    });
    finish(&state, Ok(ok(body)))
}

async fn list_profiles(State(state): State<Shared>) -> Response {
    let custom: Vec<GroupProfile> = state.custom.read().expect("registry lock").values().cloned().collect();
    let body = json!({
        "profiles": state.profiles,
        "custom": custom,
        "builtin": [GroupProfile::shortest()],
    });
    finish(&state, Ok(ok(body)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewProfile {
    profile_id: String,
    base: String,
    #[serde(default)]
    confidence: BTreeMap<BarrierLabelType, f64>,
}

fn create_profile_inner(state: &AppState, body: &[u8]) -> Result<Reply, ApiError> {
    let mut de = serde_json::Deserializer::from_slice(body);
    let req: NewProfile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        ApiError::bad_request("invalid_profile", e.into_inner().to_string()).with_path(path)
    })?;
    if req.profile_id.is_empty() {
        return Err(ApiError::bad_request("invalid_profile", "profile id must not be empty").with_path("profile_id"));
    }
    let base = profile_param(state, &req.base).map_err(|e| e.with_path("base"))?;
    let profile = customize_profile(&base, req.profile_id.clone(), &req.confidence).map_err(|e| {
        let path = match &e {
            ProfileError::OutOfRange { label_type, .. } => format!("confidence.{label_type}"),
            ProfileError::Invalid { path, .. } => path.clone(),
            _ => String::new(),
        };
        ApiError::bad_request("invalid_profile", e.to_string()).with_path(path)
    })?;

    let mut registry = state.custom.write().expect("registry lock");
    let taken = req.profile_id == SHORTEST_PROFILE_ID
        || state.profiles.iter().any(|p| p.profile_id == req.profile_id)
        || registry.contains_key(&req.profile_id);
    if taken {
        return Err(ApiError {
            status: StatusCode::CONFLICT,
            kind: "duplicate_profile",
            module: "profiles",
            message: format!("profile id `{}` already exists", req.profile_id),
            path: Some("profile_id".into()),
        });
    }
    registry.insert(profile.profile_id.clone(), profile.clone());
    if let Some(path) = &state.custom_file {
        let all: Vec<GroupProfile> = registry.values().cloned().collect();
        if let Err(e) = std::fs::write(path, save_profiles(&all)) {
            log::warn!("could not persist custom profiles to {}: {e}", path.display());
        }
    }
    Ok(Reply {
        status: StatusCode::CREATED,
        body: json!({ "profile": profile }),
    })
}

async fn create_profile(State(state): State<Shared>, body: Bytes) -> Response {
    let result = create_profile_inner(&state, &body);
    finish(&state, result)
}

fn scores_inner(state: &AppState, q: &HashMap<String, String>) -> Result<Reply, ApiError> {
    let profile = profile_param(state, required(q, "profile_id")?)?;
    let level = q.get("level").map(String::as_str).unwrap_or("segment");
    let percentile = match q.get("percentile") {
        None => state.options.percentile,
        Some(v) => v
            .parse::<f64>()
            .ok()
            .filter(|p| *p > 0.0 && *p <= 100.0)
            .ok_or_else(|| {
                ApiError::bad_request("invalid_parameter", format!("percentile `{v}` outside (0, 100]"))
                    .with_path("percentile")
            })?,
    };
    let weighting = state.options.weighting;
    let graph = &state.graph;
    let normalizer = compute_normalizer_with(graph, &profile, percentile, weighting)
        .map_err(|e| ApiError::bad_request(e.kind(), e.to_string()))?;
    let extra = json!({
        "profile_id": profile.profile_id,
        "level": level,
        "normalizer": normalizer,
        "percentile": percentile,
    });
    let fc = match level {
        "segment" => {
            let scores = segment_scores_with(graph, &profile, normalizer, weighting)
                .map_err(|e| ApiError::bad_request(e.kind(), e.to_string()))?;
            segment_scores_geojson(graph, &scores, &profile.profile_id, normalizer)
        }
        "neighborhood" => {
            let hoods = state.neighborhoods.as_deref().ok_or_else(|| {
                ApiError::bad_request("no_neighborhoods", "service was started without neighborhoods")
                    .with_path("level")
            })?;
            let scores = neighborhood_scores_with(graph, hoods, &profile, normalizer, weighting)
                .map_err(|e| ApiError::bad_request(e.kind(), e.to_string()))?;
            neighborhood_scores_geojson(hoods, &scores, &profile.profile_id, normalizer)
        }
        other => {
            return Err(ApiError::bad_request(
                "invalid_parameter",
                format!("level must be segment or neighborhood, got `{other}`"),
            )
            .with_path("level"))
        }
    };
    Ok(ok(collection_body(fc, extra)))
}

async fn scores(State(state): State<Shared>, Query(q): Query<HashMap<String, String>>) -> Response {
    let result = scores_inner(&state, &q);
    finish(&state, result)
}

fn route_options(state: &AppState) -> RouteOptions {
    RouteOptions {
        max_snap_m: state.options.route_snap_max_m,
        weighting: state.options.weighting,
        ..RouteOptions::default()
    }
}

fn route_inner(state: &AppState, q: &HashMap<String, String>) -> Result<Reply, ApiError> {
    let profile = profile_param(state, required(q, "profile_id")?)?;
    let from = point_param(q, "from")?;
    let to = point_param(q, "to")?;
    let r = route(&state.graph, &profile, from, to, &route_options(state))?;
    let fc = routes_geojson(&state.graph, std::slice::from_ref(&r));
    Ok(ok(collection_body(fc, json!({ "profile_id": r.profile_id }))))
}

async fn route_handler(State(state): State<Shared>, Query(q): Query<HashMap<String, String>>) -> Response {
    let s = state.clone();
    let result = tokio::task::spawn_blocking(move || route_inner(&s, &q))
        .await
        .expect("route task does not panic");
    finish(&state, result)
}

fn routes_inner(state: &AppState, q: &HashMap<String, String>) -> Result<Reply, ApiError> {
    let ids = required(q, "profile_ids")?;
    let mut profiles: Vec<GroupProfile> = Vec::new();
    for id in ids.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !profiles.iter().any(|p| p.profile_id == id) {
            profiles.push(profile_param(state, id)?);
        }
    }
    let from = point_param(q, "from")?;
    let to = point_param(q, "to")?;
    let routes = compare_routes(&state.graph, &profiles, from, to, &route_options(state))?;
    let ids: Vec<&str> = routes.iter().map(|r| r.profile_id.as_str()).collect();
    let fc = routes_geojson(&state.graph, &routes);
    Ok(ok(collection_body(fc, json!({ "profile_ids": ids }))))
}

async fn routes_handler(State(state): State<Shared>, Query(q): Query<HashMap<String, String>>) -> Response {
    let s = state.clone();
    let result = tokio::task::spawn_blocking(move || routes_inner(&s, &q))
        .await
        .expect("route task does not panic");
    finish(&state, result)
}

async fn stamp_version(State(state): State<Shared>, mut res: Response) -> Response {
    if let Ok(v) = HeaderValue::from_str(&state.version) {
        res.headers_mut().insert(HeaderName::from_static(VERSION_HEADER), v);
    }
    res
}

/// Builds the router; `static_dir`, when given, is served for every path
/// not matched by an API route.
pub fn router(state: Shared, static_dir: Option<&Path>, cors_allowlist: &[String]) -> Router {
    let mut app = Router::new()
        .route("/health", get(health))
        .route("/profiles", get(list_profiles).post(create_profile))
        .route("/scores", get(scores))
        .route("/route", get(route_handler))
        .route("/routes", get(routes_handler));
    if let Some(dir) = static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let mut app = app
        .layer(axum::middleware::map_response_with_state(state.clone(), stamp_version))
        .with_state(state);
    if !cors_allowlist.is_empty() {
        let origins: Vec<HeaderValue> = cors_allowlist
            .iter()
            .filter_map(|o| HeaderValue::from_str(o).ok())
            .collect();
        app = app.layer(
            CorsLayer::new()
                .allow_origin(AllowOrigin::list(origins))
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE])
                .expose_headers([HeaderName::from_static(VERSION_HEADER)]),
        );
    }
    app
}

/// Loads the configured artifacts and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), Error> {
    let state = Arc::new(AppState::load(&config)?);
    log::info!(
        "loaded graph ({} nodes, {} edges), {} profiles, data version {}",
        state.graph.nodes().len(),
        state.graph.edges().len(),
        state.profiles.len(),
        state.version
    );
    let app = router(state, config.static_dir.as_deref(), &config.cors_allowlist);
    let addr = SocketAddr::new(config.bind, config.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(addr.to_string(), e))?;
    log::info!("listening on {addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(addr.to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_paths() {
        let c =
            ServiceConfig::from_toml("graph = \"g.json\"\nprofiles = \"/abs/p.json\"\n", Path::new("/etc/sa")).unwrap();
        assert_eq!(c.port, 8080);
        assert_eq!(c.graph, PathBuf::from("/etc/sa/g.json"));
        assert_eq!(c.profiles, PathBuf::from("/abs/p.json"));
        assert_eq!(c.normalizer_percentile, 95.0);
        assert_eq!(c.route_snap_max_m, 100.0);
    }

    #[test]
    fn config_rejects_bad_values() {
        let base = "graph = \"g\"\nprofiles = \"p\"\n";
        for extra in [
            "merge_eps_m = -1.0",
            "normalizer_percentile = 0.0",
            "port = 0",
            "port = 70000",
            "colour = 1",
        ] {
            assert!(
                ServiceConfig::from_toml(&format!("{base}{extra}\n"), Path::new(".")).is_err(),
                "{extra}"
            );
        }
    }

    #[test]
    fn version_depends_on_content() {
        let a = data_version([b"x".as_slice(), b"y".as_slice()]);
        assert_eq!(a, data_version([b"x".as_slice(), b"y".as_slice()]));
        assert_ne!(a, data_version([b"xy".as_slice(), b"".as_slice()]));
        assert_eq!(a.len(), 16);
    }
}
