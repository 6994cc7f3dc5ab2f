use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::str::FromStr;

use geojson::{feature::Id, FeatureCollection, GeometryValue};

use super::{Edge, GraphError, Node, Segment, SegmentKind, SidewalkGraph};
use crate::geo::{haversine_m, polyline_length_m, GeoPoint, EARTH_RADIUS_M};

/// One polyline feature of the sidewalk geometry document.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentInput {
    pub edge_id: Option<String>,
    pub kind: SegmentKind,
    pub polyline: Vec<GeoPoint>,
}

fn geometry_error(feature: impl Into<String>, message: impl Into<String>) -> GraphError {
    GraphError::Geometry {
        feature: feature.into(),
        message: message.into(),
    }
}

/// Reads a GeoJSON FeatureCollection of LineString features carrying a
/// `kind` property (`sidewalk` or `crossing`). Edge ids come from the
/// feature id or an `edge_id` property.
pub fn parse_sidewalk_geojson(text: &str) -> Result<Vec<SegmentInput>, GraphError> {
    let fc = FeatureCollection::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
    let mut out = Vec::with_capacity(fc.features.len());
    for (i, feature) in fc.features.iter().enumerate() {
        let props = feature.properties.as_ref();
        let edge_id = match (&feature.id, props.and_then(|p| p.get("edge_id"))) {
            (_, Some(serde_json::Value::String(s))) => Some(s.clone()),
            (_, Some(serde_json::Value::Number(n))) => Some(n.to_string()),
            (Some(Id::String(s)), _) => Some(s.clone()),
            (Some(Id::Number(n)), _) => Some(n.to_string()),
            _ => None,
        };
        let label = edge_id.clone().unwrap_or_else(|| format!("#{i}"));
        let kind = match props.and_then(|p| p.get("kind")).and_then(|k| k.as_str()) {
            Some("sidewalk") => SegmentKind::Sidewalk,
            Some("crossing") => SegmentKind::Crossing,
            Some(other) => return Err(geometry_error(label, format!("unknown kind `{other}`"))),
            None => return Err(geometry_error(label, "missing `kind` property")),
        };
        let coords = match feature.geometry.as_ref().map(|g| &g.value) {
            Some(GeometryValue::LineString { coordinates }) => coordinates,
            Some(other) => {
                return Err(geometry_error(
                    label,
                    format!("expected LineString, got {}", other.type_name()),
                ))
            }
            None => return Err(geometry_error(label, "feature has no geometry")),
        };
        let mut polyline = Vec::with_capacity(coords.len());
        for pos in coords {
            let s = pos.as_slice();
            if s.len() < 2 {
                return Err(geometry_error(label, "position needs lon and lat"));
            }
            let p = GeoPoint::new(s[1], s[0]).map_err(|e| geometry_error(label.clone(), e.to_string()))?;
            polyline.push(p);
        }
        out.push(SegmentInput {
            edge_id,
            kind,
            polyline,
        });
    }
    Ok(out)
}

fn cmp_point(a: &GeoPoint, b: &GeoPoint) -> Ordering {
    a.lat.total_cmp(&b.lat).then(a.lon.total_cmp(&b.lon))
}

fn cmp_polyline(a: &[GeoPoint], b: &[GeoPoint]) -> Ordering {
    for (p, q) in a.iter().zip(b) {
        match cmp_point(p, q) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index wins so the result does not depend on call order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Builds the routable graph. Polyline endpoints closer than `merge_eps_m`
/// (transitively) become one node placed at their mean position; edge
/// lengths always come from the original polylines.
pub fn build_graph(inputs: &[SegmentInput], merge_eps_m: f64) -> Result<SidewalkGraph, GraphError> {
    if !(merge_eps_m.is_finite() && merge_eps_m >= 0.0) {
        return Err(GraphError::InvalidDistance(merge_eps_m));
    }

    let mut segments: Vec<Segment> = Vec::with_capacity(inputs.len());
    // unnamed segments are numbered in geometry order, not input order
    let mut unnamed: Vec<usize> = (0..inputs.len()).filter(|&i| inputs[i].edge_id.is_none()).collect();
    unnamed.sort_by(|&a, &b| {
        let (a, b) = (&inputs[a], &inputs[b]);
        a.kind.cmp(&b.kind).then_with(|| cmp_polyline(&a.polyline, &b.polyline))
    });
    let generated: HashMap<usize, String> = unnamed
        .iter()
        .enumerate()
        .map(|(rank, &i)| (i, format!("e{rank:05}")))
        .collect();

    let mut ids = BTreeSet::new();
    for (i, input) in inputs.iter().enumerate() {
        let edge_id = input.edge_id.clone().unwrap_or_else(|| generated[&i].clone());
        if input.polyline.len() < 2 {
            return Err(geometry_error(edge_id, "polyline needs at least 2 points"));
        }
        if let Some(p) = input.polyline.iter().find(|p| !p.is_valid()) {
            return Err(geometry_error(
                edge_id,
                format!("invalid coordinate lat={}, lon={}", p.lat, p.lon),
            ));
        }
        let length_m = polyline_length_m(&input.polyline);
        if length_m <= 0.0 {
            return Err(geometry_error(edge_id, "polyline has zero length"));
        }
        if !ids.insert(edge_id.clone()) {
            return Err(GraphError::DuplicateEdgeId(edge_id));
        }
        segments.push(Segment {
            edge_id,
            polyline: input.polyline.clone(),
            kind: input.kind,
            length_m,
        });
    }
    segments.sort_by(|a, b| a.edge_id.cmp(&b.edge_id));

    // endpoints 2i and 2i+1 belong to segment i
    let endpoints: Vec<GeoPoint> = segments
        .iter()
        .flat_map(|s| [s.polyline[0], s.polyline[s.polyline.len() - 1]])
        .collect();
    let mut uf = UnionFind::new(endpoints.len());
    if merge_eps_m == 0.0 {
        let mut exact: HashMap<(u64, u64), usize> = HashMap::new();
        for (i, p) in endpoints.iter().enumerate() {
            let key = (p.lat.to_bits(), p.lon.to_bits());
            match exact.get(&key) {
                Some(&j) => uf.union(i, j),
                None => {
                    exact.insert(key, i);
                }
            }
        }
    } else {
        let max_abs_lat = endpoints.iter().map(|p| p.lat.abs()).fold(0.0_f64, f64::max);
        let cell_lat = (merge_eps_m / EARTH_RADIUS_M).to_degrees() * (1.0 + 1e-9);
        let cell_lon = cell_lat / max_abs_lat.to_radians().cos().max(1e-6);
        let cell_of = |p: &GeoPoint| ((p.lat / cell_lat).floor() as i64, (p.lon / cell_lon).floor() as i64);
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in endpoints.iter().enumerate() {
            grid.entry(cell_of(p)).or_default().push(i);
        }
        for (i, p) in endpoints.iter().enumerate() {
            let (cy, cx) = cell_of(p);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(members) = grid.get(&(cy + dy, cx + dx)) {
                        for &j in members {
                            if j > i && haversine_m(*p, endpoints[j]) <= merge_eps_m {
                                uf.union(i, j);
                            }
                        }
                    }
                }
            }
        }
    }

    let mut clusters: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..endpoints.len() {
        clusters.entry(uf.find(i)).or_default().push(i);
    }
    let mut placed: Vec<(GeoPoint, Vec<usize>)> = clusters
        .into_values()
        .map(|members| {
            let mut pts: Vec<GeoPoint> = members.iter().map(|&i| endpoints[i]).collect();
            pts.sort_by(cmp_point);
            let n = pts.len() as f64;
            let lat = pts.iter().map(|p| p.lat).sum::<f64>() / n;
            let lon = pts.iter().map(|p| p.lon).sum::<f64>() / n;
            (GeoPoint { lat, lon }, members)
        })
        .collect();
    placed.sort_by(|a, b| {
        cmp_point(&a.0, &b.0).then_with(|| {
            let ma = a.1.iter().map(|&i| endpoints[i]).min_by(cmp_point);
            let mb = b.1.iter().map(|&i| endpoints[i]).min_by(cmp_point);
            match (ma, mb) {
                (Some(x), Some(y)) => cmp_point(&x, &y),
                _ => Ordering::Equal,
            }
        })
    });

    let width = placed.len().to_string().len().max(6);
    let mut node_of_endpoint = vec![0usize; endpoints.len()];
    let mut nodes = Vec::with_capacity(placed.len());
    for (idx, (position, members)) in placed.into_iter().enumerate() {
        for m in members {
            node_of_endpoint[m] = idx;
        }
        nodes.push(Node {
            node_id: format!("n{idx:0width$}"),
            position,
            component: 0,
        });
    }

    let edges = segments
        .into_iter()
        .enumerate()
        .map(|(i, segment)| Edge {
            segment,
            from: node_of_endpoint[2 * i],
            to: node_of_endpoint[2 * i + 1],
            labels: Vec::new(),
        })
        .collect();

    Ok(SidewalkGraph::assemble(nodes, edges))
}
