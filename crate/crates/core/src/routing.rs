//! Personalized shortest paths. An edge of length L carrying labels costs
//! `L + 0.1 * L * Σ C(label)`, so a profile's confidence-not-passable turns
//! every barrier into extra distance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use geojson::{Feature, FeatureCollection, Geometry, GeometryValue};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::geo::{haversine_m, GeoPoint};
use crate::graph::{Edge, GraphError, SidewalkGraph};
use crate::profiles::{GroupProfile, LabelWeighting, SHORTEST_PROFILE_ID};
use crate::scoring::segment_penalty_with;
use crate::survey::{BarrierLabelType, Severity};

pub const DEFAULT_ROUTE_SNAP_M: f64 = 100.0;
const LABEL_LENGTH_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error("{endpoint} is {distance_m:.1} m from the nearest node (max {max_snap_m} m)")]
    Unsnappable {
        endpoint: Endpoint,
        distance_m: f64,
        max_snap_m: f64,
    },
    #[error("{origin_node} and {dest_node} are in different components")]
    Disconnected { origin_node: String, dest_node: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid snap distance {0}")]
    InvalidSnapDistance(f64),
}

impl RouteError {
    pub fn kind(&self) -> &'static str {
        match self {
            RouteError::Unsnappable { .. } => "unsnappable",
            RouteError::Disconnected { .. } => "disconnected",
            RouteError::Graph(e) => e.kind(),
            RouteError::InvalidSnapDistance(_) => "invalid_distance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Origin,
    Destination,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Endpoint::Origin => "origin",
            Endpoint::Destination => "destination",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Search {
    /// Goal-directed with a haversine lower bound.
    #[default]
    AStar,
    /// Plain label-setting search with the binary heap only.
    HeapOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteOptions {
    pub max_snap_m: f64,
    pub search: Search,
    pub weighting: LabelWeighting,
}

impl Default for RouteOptions {
    fn default() -> Self {
        RouteOptions {
            max_snap_m: DEFAULT_ROUTE_SNAP_M,
            search: Search::AStar,
            weighting: LabelWeighting::TypeLevel,
        }
    }
}

pub fn weighted_length_with(edge: &Edge, profile: &GroupProfile, weighting: LabelWeighting) -> f64 {
    let l = edge.length_m();
    l + LABEL_LENGTH_FACTOR * l * segment_penalty_with(edge, profile, weighting)
}

pub fn weighted_length(edge: &Edge, profile: &GroupProfile) -> f64 {
    weighted_length_with(edge, profile, LabelWeighting::TypeLevel)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub edge_id: String,
    pub label_id: String,
    pub label_type: BarrierLabelType,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub profile_id: String,
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
    pub length_m: f64,
    pub weighted_m: f64,
    pub barriers: Vec<Barrier>,
    pub origin_snap_m: f64,
    pub dest_snap_m: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.g.total_cmp(&self.g))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compares the origin-rooted paths `path(a) + [extra_a]` and `path(b)` by
/// node index, which equals node-id order.
fn path_less(pred: &[Option<(usize, usize)>], a: usize, extra_a: usize, b: usize) -> bool {
    let unwind = |mut n: usize| {
        let mut p = vec![n];
        while let Some((prev, _)) = pred[n] {
            p.push(prev);
            n = prev;
        }
        p.reverse();
        p
    };
    let mut pa = unwind(a);
    pa.push(extra_a);
    let pb = unwind(b);
    pa < pb
}

/// Scale that keeps the haversine bound below every edge's length even when
/// merged nodes sit slightly off their polylines' endpoints.
fn heuristic_scale(graph: &SidewalkGraph) -> f64 {
    let mut k: f64 = 1.0;
    for e in graph.edges() {
        let straight = haversine_m(graph.node(e.from).position, graph.node(e.to).position);
        if straight > 0.0 {
            k = k.min(e.length_m() / straight);
        }
    }
    k * (1.0 - 1e-6)
}

struct SearchResult {
    path_nodes: Vec<usize>,
    path_edges: Vec<usize>,
}

fn shortest_path(
    graph: &SidewalkGraph,
    weights: &[f64],
    origin: usize,
    dest: usize,
    search: Search,
) -> Option<SearchResult> {
    let n = graph.nodes().len();
    let mut g = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut settled = vec![false; n];
    let target = graph.node(dest).position;
    let scale = match search {
        Search::AStar => heuristic_scale(graph),
        Search::HeapOnly => 0.0,
    };
    let h = |v: usize| match search {
        Search::AStar => scale * haversine_m(graph.node(v).position, target),
        Search::HeapOnly => 0.0,
    };

    g[origin] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        f: h(origin),
        g: 0.0,
        node: origin,
    });
    while let Some(Entry { g: gu, node: u, .. }) = heap.pop() {
        if settled[u] || gu != g[u] {
            continue;
        }
        settled[u] = true;
        if u == dest {
            break;
        }
        for &(ei, v) in graph.neighbors(u) {
            if settled[v] {
                continue;
            }
            let cand = gu + weights[ei];
            let better = match cand.total_cmp(&g[v]) {
                Ordering::Less => true,
                Ordering::Equal => path_less(&pred, u, v, v) || pred[v].is_some_and(|(p, pe)| p == u && ei < pe),
                Ordering::Greater => false,
            };
            if better {
                let improved = cand < g[v];
                g[v] = cand;
                pred[v] = Some((u, ei));
                if improved {
                    heap.push(Entry {
                        f: cand + h(v),
                        g: cand,
                        node: v,
                    });
                }
            }
        }
    }
    if !settled[dest] {
        return None;
    }
    let mut path_nodes = vec![dest];
    let mut path_edges = Vec::new();
    let mut cur = dest;
    while let Some((prev, e)) = pred[cur] {
        path_nodes.push(prev);
        path_edges.push(e);
        cur = prev;
    }
    path_nodes.reverse();
    path_edges.reverse();
    Some(SearchResult { path_nodes, path_edges })
}

fn snap_endpoint(
    graph: &SidewalkGraph,
    p: GeoPoint,
    endpoint: Endpoint,
    max_snap_m: f64,
) -> Result<(usize, f64), RouteError> {
    let (idx, d) = graph.nearest_node(p)?;
    if d > max_snap_m {
        return Err(RouteError::Unsnappable {
            endpoint,
            distance_m: d,
            max_snap_m,
        });
    }
    Ok((idx, d))
}

/// Minimum weighted-length route between the nodes nearest to `origin` and
/// `dest`. Equal-cost alternatives resolve to the lexicographically smallest
/// node-id sequence.
pub fn route(
    graph: &SidewalkGraph,
    profile: &GroupProfile,
    origin: GeoPoint,
    dest: GeoPoint,
    options: &RouteOptions,
) -> Result<Route, RouteError> {
    if options.max_snap_m.is_nan() || options.max_snap_m < 0.0 {
        return Err(RouteError::InvalidSnapDistance(options.max_snap_m));
    }
    let (o, o_d) = snap_endpoint(graph, origin, Endpoint::Origin, options.max_snap_m)?;
    let (t, t_d) = snap_endpoint(graph, dest, Endpoint::Destination, options.max_snap_m)?;
    route_between_nodes(graph, profile, o, t, options.search, options.weighting).map(|mut r| {
        r.origin_snap_m = o_d;
        r.dest_snap_m = t_d;
        r
    })
}

/// Routes between two node indices.
pub fn route_between_nodes(
    graph: &SidewalkGraph,
    profile: &GroupProfile,
    origin: usize,
    dest: usize,
    search: Search,
    weighting: LabelWeighting,
) -> Result<Route, RouteError> {
    let disconnected = || RouteError::Disconnected {
        origin_node: graph.node(origin).node_id.clone(),
        dest_node: graph.node(dest).node_id.clone(),
    };
    if graph.node(origin).component != graph.node(dest).component {
        return Err(disconnected());
    }
    let weights: Vec<f64> = graph
        .edges()
        .iter()
        .map(|e| weighted_length_with(e, profile, weighting))
        .collect();
    let found = shortest_path(graph, &weights, origin, dest, search).ok_or_else(disconnected)?;

    let mut length_m = 0.0;
    let mut weighted_m = 0.0;
    let mut barriers = Vec::new();
    for &ei in &found.path_edges {
        let e = graph.edge(ei);
        length_m += e.length_m();
        weighted_m += weights[ei];
        barriers.extend(e.labels.iter().map(|a| Barrier {
            edge_id: e.edge_id().to_string(),
            label_id: a.label.label_id.clone(),
            label_type: a.label.label_type,
            severity: a.label.severity,
        }));
    }
    Ok(Route {
        profile_id: profile.profile_id.clone(),
        nodes: found
            .path_nodes
            .iter()
            .map(|&i| graph.node(i).node_id.clone())
            .collect(),
        edges: found
            .path_edges
            .iter()
            .map(|&i| graph.edge(i).edge_id().to_string())
            .collect(),
        length_m,
        weighted_m,
        barriers,
        origin_snap_m: 0.0,
        dest_snap_m: 0.0,
    })
}

/// One route per profile, with the zero-confidence "shortest" profile
/// prepended when the list does not already contain it.
pub fn compare_routes(
    graph: &SidewalkGraph,
    profiles: &[GroupProfile],
    origin: GeoPoint,
    dest: GeoPoint,
    options: &RouteOptions,
) -> Result<Vec<Route>, RouteError> {
    let mut all = Vec::with_capacity(profiles.len() + 1);
    if !profiles.iter().any(|p| p.profile_id == SHORTEST_PROFILE_ID) {
        all.push(GroupProfile::shortest());
    }
    all.extend(profiles.iter().cloned());
    all.iter().map(|p| route(graph, p, origin, dest, options)).collect()
}

/// Polyline of a route in travel order, `[lon, lat]` pairs.
pub fn route_coordinates(graph: &SidewalkGraph, route: &Route) -> Vec<[f64; 2]> {
    let mut coords: Vec<[f64; 2]> = Vec::new();
    for (i, edge_id) in route.edges.iter().enumerate() {
        let e = graph.edge(graph.edge_by_id(edge_id).expect("route edge exists"));
        let forward = graph.node(e.from).node_id == route.nodes[i];
        let mut pts: Vec<[f64; 2]> = e.segment.polyline.iter().map(|p| [p.lon, p.lat]).collect();
        if !forward {
            pts.reverse();
        }
        for p in pts {
            if coords.last() != Some(&p) {
                coords.push(p);
            }
        }
    }
    if coords.len() < 2 {
        let n = graph
            .node(graph.node_by_id(&route.nodes[0]).expect("route node exists"))
            .position;
        coords = vec![[n.lon, n.lat]; 2];
    }
    coords
}

pub fn routes_geojson(graph: &SidewalkGraph, routes: &[Route]) -> FeatureCollection {
    let features = routes
        .iter()
        .map(|r| {
            let props = json!({
                "profile_id": r.profile_id,
                "length_m": r.length_m,
                "weighted_m": r.weighted_m,
                "barriers": r.barriers,
                "nodes": r.nodes,
                "edges": r.edges,
                "origin_snap_m": r.origin_snap_m,
                "dest_snap_m": r.dest_snap_m,
            });
            Feature {
                geometry: Some(Geometry::new(GeometryValue::new_line_string(route_coordinates(
                    graph, r,
                )))),
                properties: props.as_object().cloned(),
                ..Default::default()
            }
        })
        .collect::<Vec<_>>();
    FeatureCollection::new(features)
}
