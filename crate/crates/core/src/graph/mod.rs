//! Routable sidewalk network with crowdsourced barrier labels attached to
//! its edges.

mod build;
mod io;
mod snap;

use std::collections::HashMap;

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_m, GeoPoint};
use crate::survey::{BarrierLabelType, Severity};

pub use build::{build_graph, parse_sidewalk_geojson, SegmentInput};
pub use io::{GraphDocument, GraphDocumentEdge, GraphDocumentLabel, GraphDocumentNode, GraphParams, GRAPH_FORMAT};
pub use snap::{parse_labels, snap_labels, snap_labels_with, SnapStrategy, UnsnappedLabel};

pub const DEFAULT_MERGE_EPS_M: f64 = 0.5;
pub const DEFAULT_MAX_SNAP_M: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Sidewalk,
    Crossing,
}

impl SegmentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SegmentKind::Sidewalk => "sidewalk",
            SegmentKind::Crossing => "crossing",
        }
    }

    /// Obstacles and surface problems go on sidewalks; curb ramps and missing
    /// curb ramps on crossings.
    pub fn admits(&self, label_type: BarrierLabelType) -> bool {
        label_type.belongs_on_crossing() == (*self == SegmentKind::Crossing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub edge_id: String,
    pub polyline: Vec<GeoPoint>,
    pub kind: SegmentKind,
    pub length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPoint {
    pub label_id: String,
    pub label_type: BarrierLabelType,
    /// Original 1-5 crowdsourced rating, when known.
    pub severity_raw: Option<u8>,
    pub severity: Severity,
    pub position: GeoPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttachedLabel {
    pub label: LabelPoint,
    pub snap_distance_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub node_id: String,
    pub position: GeoPoint,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub segment: Segment,
    pub from: usize,
    pub to: usize,
    pub labels: Vec<AttachedLabel>,
}

impl Edge {
    pub fn other_end(&self, node: usize) -> usize {
        if self.from == node {
            self.to
        } else {
            self.from
        }
    }

    pub fn edge_id(&self) -> &str {
        &self.segment.edge_id
    }

    pub fn length_m(&self) -> f64 {
        self.segment.length_m
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("feature {feature}: {message}")]
    Geometry { feature: String, message: String },
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdgeId(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid graph document: {0}")]
    InvalidDocument(String),
    #[error("invalid merge/snap distance {0}")]
    InvalidDistance(f64),
}

impl GraphError {
    pub fn kind(&self) -> &'static str {
        match self {
            GraphError::Geometry { .. } => "invalid_geometry",
            GraphError::Malformed(_) => "malformed",
            GraphError::DuplicateEdgeId(_) => "duplicate_edge_id",
            GraphError::EmptyGraph => "empty_graph",
            GraphError::InvalidDocument(_) => "invalid_graph_document",
            GraphError::InvalidDistance(_) => "invalid_distance",
        }
    }
}

type NodeEntry = GeomWithData<[f64; 3], usize>;

/// Undirected sidewalk graph.
///
/// Nodes are stored sorted by node id and edges sorted by edge id, so index
/// order and id order coincide.
#[derive(Debug, Clone)]
pub struct SidewalkGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    node_tree: RTree<NodeEntry>,
    component_count: usize,
}

impl PartialEq for SidewalkGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl SidewalkGraph {
    /// Assembles a graph from nodes and edges already in id order, assigning
    /// connected components.
    pub(crate) fn assemble(mut nodes: Vec<Node>, edges: Vec<Edge>) -> SidewalkGraph {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.from].push((i, e.to));
            if e.from != e.to {
                adjacency[e.to].push((i, e.from));
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }

        let mut component = vec![usize::MAX; nodes.len()];
        let mut count = 0;
        for start in 0..nodes.len() {
            if component[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            component[start] = count;
            while let Some(n) = stack.pop() {
                for &(_, m) in &adjacency[n] {
                    if component[m] == usize::MAX {
                        component[m] = count;
                        stack.push(m);
                    }
                }
            }
            count += 1;
        }
        for (node, c) in nodes.iter_mut().zip(component) {
            node.component = c;
        }

        let node_index = nodes.iter().enumerate().map(|(i, n)| (n.node_id.clone(), i)).collect();
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.segment.edge_id.clone(), i))
            .collect();
        let node_tree = RTree::bulk_load(
            nodes
                .iter()
                .enumerate()
                .map(|(i, n)| GeomWithData::new(n.position.to_unit_vector(), i))
                .collect(),
        );
        SidewalkGraph {
            nodes,
            edges,
            adjacency,
            node_index,
            edge_index,
            node_tree,
            component_count: count,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn node_by_id(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_by_id(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    /// `(edge index, neighbor node index)` pairs, sorted.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn total_length_m(&self) -> f64 {
        self.edges.iter().map(|e| e.segment.length_m).sum()
    }

    pub fn label_count(&self) -> usize {
        self.edges.iter().map(|e| e.labels.len()).sum()
    }

    /// Nearest node by great-circle distance; equal distances resolve to the
    /// smaller node id.
    pub fn nearest_node(&self, p: GeoPoint) -> Result<(usize, f64), GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let q = p.to_unit_vector();
        let mut best: Option<(f64, usize)> = None;
        let mut cutoff = f64::INFINITY;
        for (entry, chord2) in self.node_tree.nearest_neighbor_iter_with_distance_2(q) {
            if chord2 > cutoff {
                break;
            }
            let idx = entry.data;
            let d = haversine_m(p, self.nodes[idx].position);
            let better = match best {
                None => true,
                Some((bd, bi)) => d < bd || (d == bd && idx < bi),
            };
            if better {
                best = Some((d, idx));
            }
            if cutoff.is_infinite() {
                cutoff = chord2 * (1.0 + 1e-9) + 1e-24;
            }
        }
        let (d, idx) = best.expect("non-empty tree yields a neighbor");
        Ok((idx, d))
    }
}
