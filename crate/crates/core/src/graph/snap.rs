use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};
use serde::{Deserialize, Serialize};

use super::{AttachedLabel, GraphError, LabelPoint, SidewalkGraph};
use crate::geo::{point_to_polyline_m, GeoPoint, EARTH_RADIUS_M};
use crate::survey::{BarrierLabelType, Severity};

#[derive(Deserialize)]
#[serde(untagged)]
enum IdValue {
    Text(String),
    Number(serde_json::Number),
}

#[derive(Deserialize)]
struct LabelRecord {
    label_id: IdValue,
    label_type: String,
    #[serde(default)]
    severity: Option<u8>,
    lat: f64,
    lng: f64,
}

fn parse_label_type(s: &str) -> Option<BarrierLabelType> {
    match s {
        "Obstacle" => Some(BarrierLabelType::Obstacle),
        "SurfaceProblem" => Some(BarrierLabelType::SurfaceProblem),
        "CurbRamp" => Some(BarrierLabelType::CurbRamp),
        "NoCurbRamp" => Some(BarrierLabelType::MissingCurbRamp),
        other => other.parse().ok(),
    }
}

/// Reads a labels document: a JSON array of
/// `{label_id, label_type, severity, lat, lng}`. Label types may use either
/// the snake_case names or the crowdsourcing export names (`NoCurbRamp`,
/// `SurfaceProblem`, ...). A missing severity is treated as mid.
pub fn parse_labels(text: &str) -> Result<Vec<LabelPoint>, GraphError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let records: Vec<LabelRecord> = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| GraphError::Malformed(format!("labels{}: {}", bracket(e.path()), e.inner())))?;
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let label_id = match r.label_id {
                IdValue::Text(s) => s,
                IdValue::Number(n) => n.to_string(),
            };
            let err = |m: String| GraphError::Malformed(format!("labels[{i}] ({label_id}): {m}"));
            let label_type =
                parse_label_type(&r.label_type).ok_or_else(|| err(format!("unknown label type `{}`", r.label_type)))?;
            let severity = match r.severity {
                None => Severity::Mid,
                Some(raw) => Severity::from_raw(raw).ok_or_else(|| err(format!("severity {raw} outside 1-5")))?,
            };
            let position = GeoPoint::new(r.lat, r.lng).map_err(|e| err(e.to_string()))?;
            Ok(LabelPoint {
                label_id: label_id.clone(),
                label_type,
                severity_raw: r.severity,
                severity,
                position,
            })
        })
        .collect()
}

fn bracket(path: &serde_path_to_error::Path) -> String {
    let s = path.to_string();
    if s == "." {
        String::new()
    } else {
        format!("[{s}]")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnsnappedLabel {
    pub label_id: String,
    pub label_type: BarrierLabelType,
    pub lat: f64,
    pub lng: f64,
    /// Distance to the closest edge of admissible kind, if any exists.
    pub nearest_admissible_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SnapStrategy {
    /// R-tree over edge bounding boxes, then exact distances on candidates.
    #[default]
    Indexed,
    /// Exact distance to every edge.
    LinearScan,
}

type EdgeBox = GeomWithData<Rectangle<[f64; 2]>, usize>;

fn edge_tree(graph: &SidewalkGraph) -> RTree<EdgeBox> {
    RTree::bulk_load(
        graph
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
                for p in &e.segment.polyline {
                    lo = [lo[0].min(p.lon), lo[1].min(p.lat)];
                    hi = [hi[0].max(p.lon), hi[1].max(p.lat)];
                }
                GeomWithData::new(Rectangle::from_corners(lo, hi), i)
            })
            .collect(),
    )
}

/// Degree envelope around `p` containing every point within `radius_m` of it
/// in the local projection used by `point_to_polyline_m`.
fn search_envelope(p: GeoPoint, radius_m: f64) -> AABB<[f64; 2]> {
    let dlat = (radius_m / EARTH_RADIUS_M).to_degrees() * (1.0 + 1e-9) + 1e-12;
    let dlon = dlat / p.lat.to_radians().cos().max(1e-9);
    AABB::from_corners([p.lon - dlon, p.lat - dlat], [p.lon + dlon, p.lat + dlat])
}

/// Snaps with the default indexed strategy.
pub fn snap_labels(
    graph: &SidewalkGraph,
    labels: &[LabelPoint],
    max_snap_m: f64,
) -> Result<(SidewalkGraph, Vec<UnsnappedLabel>), GraphError> {
    snap_labels_with(graph, labels, max_snap_m, SnapStrategy::Indexed)
}

/// Attaches each label to the nearest edge whose kind admits it, when that
/// edge is within `max_snap_m`; equal distances go to the smaller edge id.
/// Labels with no admissible edge in range are returned as unsnapped.
pub fn snap_labels_with(
    graph: &SidewalkGraph,
    labels: &[LabelPoint],
    max_snap_m: f64,
    strategy: SnapStrategy,
) -> Result<(SidewalkGraph, Vec<UnsnappedLabel>), GraphError> {
    if !(max_snap_m.is_finite() && max_snap_m >= 0.0) {
        return Err(GraphError::InvalidDistance(max_snap_m));
    }
    let tree = match strategy {
        SnapStrategy::Indexed => Some(edge_tree(graph)),
        SnapStrategy::LinearScan => None,
    };
    let mut out = graph.clone();
    let mut unsnapped = Vec::new();

    let nearest_admissible = |label: &LabelPoint, candidates: &mut dyn Iterator<Item = usize>| {
        let mut best: Option<(f64, usize)> = None;
        for i in candidates {
            let edge = graph.edge(i);
            if !edge.segment.kind.admits(label.label_type) {
                continue;
            }
            let (d, _, _) = point_to_polyline_m(label.position, &edge.segment.polyline);
            // edges are in id order, so the smaller index is the smaller id
            let better = match best {
                None => true,
                Some((bd, bi)) => d < bd || (d == bd && i < bi),
            };
            if better {
                best = Some((d, i));
            }
        }
        best
    };

    for label in labels {
        let best = match &tree {
            Some(tree) => {
                let env = search_envelope(label.position, max_snap_m);
                let mut it = tree.locate_in_envelope_intersecting(env).map(|e| e.data);
                nearest_admissible(label, &mut it)
            }
            None => nearest_admissible(label, &mut (0..graph.edges().len())),
        };
        match best {
            Some((d, i)) if d <= max_snap_m => out.edges[i].labels.push(AttachedLabel {
                label: label.clone(),
                snap_distance_m: d,
            }),
            _ => {
                let anywhere = nearest_admissible(label, &mut (0..graph.edges().len()));
                unsnapped.push(UnsnappedLabel {
                    label_id: label.label_id.clone(),
                    label_type: label.label_type,
                    lat: label.position.lat,
                    lng: label.position.lon,
                    nearest_admissible_m: anywhere.map(|(d, _)| d),
                });
            }
        }
    }

    for edge in &mut out.edges {
        edge.labels.sort_by(|a, b| a.label.label_id.cmp(&b.label.label_id));
    }
    unsnapped.sort_by(|a, b| a.label_id.cmp(&b.label_id));
    Ok((out, unsnapped))
}
