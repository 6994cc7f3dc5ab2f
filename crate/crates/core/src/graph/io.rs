use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{AttachedLabel, Edge, GraphError, LabelPoint, Node, Segment, SegmentKind, SidewalkGraph, UnsnappedLabel};
use crate::geo::{polyline_length_m, GeoPoint};
use crate::survey::{BarrierLabelType, Severity};

pub const GRAPH_FORMAT: &str = "sidewalk-graph/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocumentNode {
    pub node_id: String,
    pub lat: f64,
    pub lon: f64,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocumentLabel {
    pub label_id: String,
    pub label_type: BarrierLabelType,
    pub severity: Severity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity_raw: Option<u8>,
    pub lat: f64,
    pub lng: f64,
    pub snap_distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocumentEdge {
    pub edge_id: String,
    pub kind: SegmentKind,
    pub from: String,
    pub to: String,
    pub length_m: f64,
    /// `[lon, lat]` pairs, GeoJSON order.
    pub polyline: Vec<[f64; 2]>,
    pub labels: Vec<GraphDocumentLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphParams {
    pub merge_eps_m: f64,
    pub max_snap_m: f64,
}

/// Serialized form of a built and labeled graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub format: String,
    pub params: GraphParams,
    pub component_count: usize,
    pub nodes: Vec<GraphDocumentNode>,
    pub edges: Vec<GraphDocumentEdge>,
    pub unsnapped: Vec<UnsnappedLabel>,
}

impl GraphDocument {
    pub fn from_graph(graph: &SidewalkGraph, params: GraphParams, unsnapped: Vec<UnsnappedLabel>) -> GraphDocument {
        let nodes = graph
            .nodes()
            .iter()
            .map(|n| GraphDocumentNode {
                node_id: n.node_id.clone(),
                lat: n.position.lat,
                lon: n.position.lon,
                component: n.component,
            })
            .collect();
        let edges = graph
            .edges()
            .iter()
            .map(|e| GraphDocumentEdge {
                edge_id: e.segment.edge_id.clone(),
                kind: e.segment.kind,
                from: graph.node(e.from).node_id.clone(),
                to: graph.node(e.to).node_id.clone(),
                length_m: e.segment.length_m,
                polyline: e.segment.polyline.iter().map(|p| [p.lon, p.lat]).collect(),
                labels: e
                    .labels
                    .iter()
                    .map(|a| GraphDocumentLabel {
                        label_id: a.label.label_id.clone(),
                        label_type: a.label.label_type,
                        severity: a.label.severity,
                        severity_raw: a.label.severity_raw,
                        lat: a.label.position.lat,
                        lng: a.label.position.lon,
                        snap_distance_m: a.snap_distance_m,
                    })
                    .collect(),
            })
            .collect();
        GraphDocument {
            format: GRAPH_FORMAT.into(),
            params,
            component_count: graph.component_count(),
            nodes,
            edges,
            unsnapped,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<GraphDocument, GraphError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de)
            .map_err(|e| GraphError::Malformed(format!("graph at {}: {}", e.path(), e.inner())))
    }

    /// Rebuilds the graph, checking references, lengths, the kind rule and
    /// the snap radius.
    pub fn to_graph(&self) -> Result<SidewalkGraph, GraphError> {
        let bad = |m: String| GraphError::InvalidDocument(m);
        if self.format != GRAPH_FORMAT {
            return Err(bad(format!("unsupported format `{}`", self.format)));
        }
        if !self.nodes.windows(2).all(|w| w[0].node_id < w[1].node_id) {
            return Err(bad("nodes must be sorted by node_id without duplicates".into()));
        }
        if !self.edges.windows(2).all(|w| w[0].edge_id < w[1].edge_id) {
            return Err(bad("edges must be sorted by edge_id without duplicates".into()));
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let position = GeoPoint::new(n.lat, n.lon).map_err(|e| bad(format!("node {}: {e}", n.node_id)))?;
            nodes.push(Node {
                node_id: n.node_id.clone(),
                position,
                component: 0,
            });
        }
        let lookup = |id: &str, edge: &str| {
            self.nodes
                .binary_search_by(|n| n.node_id.as_str().cmp(id))
                .map_err(|_| bad(format!("edge {edge} references unknown node `{id}`")))
        };

        let mut edges = Vec::with_capacity(self.edges.len());
        let mut seen_labels = HashSet::new();
        for e in &self.edges {
            let from = lookup(&e.from, &e.edge_id)?;
            let to = lookup(&e.to, &e.edge_id)?;
            if e.polyline.len() < 2 {
                return Err(bad(format!("edge {}: polyline needs at least 2 points", e.edge_id)));
            }
            let polyline = e
                .polyline
                .iter()
                .map(|[lon, lat]| GeoPoint::new(*lat, *lon))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|err| bad(format!("edge {}: {err}", e.edge_id)))?;
            let computed = polyline_length_m(&polyline);
            if e.length_m.is_nan() || e.length_m <= 0.0 || (computed - e.length_m).abs() > 1e-6 * e.length_m {
                return Err(bad(format!(
                    "edge {}: length_m {} disagrees with polyline length {computed}",
                    e.edge_id, e.length_m
                )));
            }
            let mut labels = Vec::with_capacity(e.labels.len());
            for l in &e.labels {
                if !e.kind.admits(l.label_type) {
                    return Err(bad(format!(
                        "label {} of type {} cannot sit on {} edge {}",
                        l.label_id,
                        l.label_type,
                        e.kind.as_str(),
                        e.edge_id
                    )));
                }
                if !(l.snap_distance_m >= 0.0 && l.snap_distance_m <= self.params.max_snap_m) {
                    return Err(bad(format!(
                        "label {}: snap distance {} out of range",
                        l.label_id, l.snap_distance_m
                    )));
                }
                if !seen_labels.insert(l.label_id.clone()) {
                    return Err(bad(format!("label {} attached twice", l.label_id)));
                }
                if let Some(raw) = l.severity_raw {
                    if Severity::from_raw(raw) != Some(l.severity) {
                        return Err(bad(format!("label {}: severity disagrees with raw {raw}", l.label_id)));
                    }
                }
                let position =
                    GeoPoint::new(l.lat, l.lng).map_err(|err| bad(format!("label {}: {err}", l.label_id)))?;
                labels.push(AttachedLabel {
                    label: LabelPoint {
                        label_id: l.label_id.clone(),
                        label_type: l.label_type,
                        severity_raw: l.severity_raw,
                        severity: l.severity,
                        position,
                    },
                    snap_distance_m: l.snap_distance_m,
                });
            }
            edges.push(Edge {
                segment: Segment {
                    edge_id: e.edge_id.clone(),
                    polyline,
                    kind: e.kind,
                    length_m: e.length_m,
                },
                from,
                to,
                labels,
            });
        }
        let graph = SidewalkGraph::assemble(nodes, edges);
        let declared: Vec<usize> = self.nodes.iter().map(|n| n.component).collect();
        let actual: Vec<usize> = graph.nodes().iter().map(|n| n.component).collect();
        if declared != actual || graph.component_count() != self.component_count {
            return Err(bad("component ids disagree with graph connectivity".into()));
        }
        Ok(graph)
    }
}
