//! Per-profile AccessScore for sidewalk segments and neighborhoods.
//!
//! A segment's penalty is the sum of the profile's confidence-not-passable
//! over its attached labels. Scores map penalties linearly onto `[0, 1]`
//! against a percentile normalizer, 1 being most accessible.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use geojson::{feature::Id, Feature, FeatureCollection, Geometry, GeometryValue, JsonObject};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::geo::{point_in_ring, polyline_midpoint, validate_ring, GeoPoint};
use crate::graph::{Edge, SidewalkGraph};
use crate::profiles::{GroupProfile, LabelWeighting};

pub const DEFAULT_PERCENTILE: f64 = 95.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("percentile {0} outside (0, 100]")]
    InvalidPercentile(f64),
    #[error("normalizer {0} must be positive")]
    InvalidNormalizer(f64),
    #[error("neighborhood {neighborhood}: {message}")]
    InvalidPolygon { neighborhood: String, message: String },
    #[error("duplicate neighborhood id `{0}`")]
    DuplicateNeighborhood(String),
    #[error("malformed neighborhoods document: {0}")]
    Malformed(String),
}

impl ScoringError {
    pub fn kind(&self) -> &'static str {
        match self {
            ScoringError::InvalidPercentile(_) => "invalid_percentile",
            ScoringError::InvalidNormalizer(_) => "invalid_normalizer",
            ScoringError::InvalidPolygon { .. } => "invalid_polygon",
            ScoringError::DuplicateNeighborhood(_) => "duplicate_neighborhood",
            ScoringError::Malformed(_) => "malformed",
        }
    }
}

/// Correctly rounded sum of finite values, independent of their order.
pub(crate) fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else {
        return 0.0;
    };
    let Some(second) = it.next() else {
        return first;
    };
    let mut acc = BigRational::zero();
    for v in [first, second].into_iter().chain(it) {
        acc += BigRational::from_float(v).expect("finite summand");
    }
    if acc.is_zero() {
        return 0.0;
    }
    acc.to_f64().unwrap_or_else(|| {
        // only reachable on overflow
        let (n, d) = (acc.numer(), acc.denom());
        if (n > &BigInt::zero()) == (d > &BigInt::zero()) {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

/// Σ over attached labels of the profile's weight for that label.
pub fn segment_penalty_with(edge: &Edge, profile: &GroupProfile, weighting: LabelWeighting) -> f64 {
    exact_sum(
        edge.labels
            .iter()
            .map(|a| profile.label_weight(a.label.label_type, a.label.severity, weighting)),
    )
}

pub fn segment_penalty(edge: &Edge, profile: &GroupProfile) -> f64 {
    segment_penalty_with(edge, profile, LabelWeighting::TypeLevel)
}

/// Nearest-rank percentile of `values`, which must be non-empty.
pub fn nearest_rank(values: &[f64], percentile: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let exact = percentile * n as f64 / 100.0;
    let rounded = exact.round();
    let rank = if (exact - rounded).abs() <= 1e-9 * exact.max(1.0) {
        rounded
    } else {
        exact.ceil()
    } as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn check_percentile(percentile: f64) -> Result<(), ScoringError> {
    if percentile > 0.0 && percentile <= 100.0 {
        Ok(())
    } else {
        Err(ScoringError::InvalidPercentile(percentile))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub percentile: f64,
    pub weighting: LabelWeighting,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            percentile: DEFAULT_PERCENTILE,
            weighting: LabelWeighting::TypeLevel,
        }
    }
}

/// Percentile of the positive segment penalties, or 1 when there are none.
pub fn compute_normalizer(graph: &SidewalkGraph, profile: &GroupProfile, percentile: f64) -> Result<f64, ScoringError> {
    compute_normalizer_with(graph, profile, percentile, LabelWeighting::TypeLevel)
}

pub fn compute_normalizer_with(
    graph: &SidewalkGraph,
    profile: &GroupProfile,
    percentile: f64,
    weighting: LabelWeighting,
) -> Result<f64, ScoringError> {
    check_percentile(percentile)?;
    let positive: Vec<f64> = graph
        .edges()
        .iter()
        .map(|e| segment_penalty_with(e, profile, weighting))
        .filter(|p| *p > 0.0)
        .collect();
    if positive.is_empty() {
        Ok(1.0)
    } else {
        Ok(nearest_rank(&positive, percentile))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentScore {
    pub edge_id: String,
    pub penalty: f64,
    pub score: f64,
}

pub fn score_from_penalty(penalty: f64, normalizer: f64) -> f64 {
    (1.0 - penalty / normalizer).clamp(0.0, 1.0)
}

pub fn segment_scores(
    graph: &SidewalkGraph,
    profile: &GroupProfile,
    normalizer: f64,
) -> Result<BTreeMap<String, SegmentScore>, ScoringError> {
    segment_scores_with(graph, profile, normalizer, LabelWeighting::TypeLevel)
}

pub fn segment_scores_with(
    graph: &SidewalkGraph,
    profile: &GroupProfile,
    normalizer: f64,
    weighting: LabelWeighting,
) -> Result<BTreeMap<String, SegmentScore>, ScoringError> {
    if !(normalizer > 0.0 && normalizer.is_finite()) {
        return Err(ScoringError::InvalidNormalizer(normalizer));
    }
    Ok(graph
        .edges()
        .iter()
        .map(|e| {
            let penalty = segment_penalty_with(e, profile, weighting);
            let id = e.edge_id().to_string();
            let score = SegmentScore {
                edge_id: id.clone(),
                penalty,
                score: score_from_penalty(penalty, normalizer),
            };
            (id, score)
        })
        .collect())
}

/// A named area made of one or more polygons (outer ring plus holes).
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub neighborhood_id: String,
    pub polygons: Vec<Vec<Vec<GeoPoint>>>,
}

impl Neighborhood {
    pub fn new(neighborhood_id: impl Into<String>, polygons: Vec<Vec<Vec<GeoPoint>>>) -> Result<Self, ScoringError> {
        let neighborhood_id = neighborhood_id.into();
        if polygons.is_empty() {
            return Err(ScoringError::InvalidPolygon {
                neighborhood: neighborhood_id,
                message: "no polygons".into(),
            });
        }
        for polygon in &polygons {
            if polygon.is_empty() {
                return Err(ScoringError::InvalidPolygon {
                    neighborhood: neighborhood_id,
                    message: "polygon without rings".into(),
                });
            }
            for ring in polygon {
                validate_ring(ring).map_err(|message| ScoringError::InvalidPolygon {
                    neighborhood: neighborhood_id.clone(),
                    message,
                })?;
            }
        }
        Ok(Neighborhood {
            neighborhood_id,
            polygons,
        })
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        self.polygons
            .iter()
            .any(|rings| point_in_ring(p, &rings[0]) && !rings[1..].iter().any(|hole| point_in_ring(p, hole)))
    }

    fn geometry(&self) -> Geometry {
        let to_rings = |rings: &Vec<Vec<GeoPoint>>| -> Vec<Vec<[f64; 2]>> {
            rings
                .iter()
                .map(|r| r.iter().map(|p| [p.lon, p.lat]).collect())
                .collect()
        };
        if self.polygons.len() == 1 {
            Geometry::new(GeometryValue::new_polygon(to_rings(&self.polygons[0])))
        } else {
            Geometry::new(GeometryValue::new_multi_polygon(self.polygons.iter().map(to_rings)))
        }
    }
}

fn positions_to_ring(id: &str, positions: &[geojson::Position]) -> Result<Vec<GeoPoint>, ScoringError> {
    positions
        .iter()
        .map(|pos| {
            let s = pos.as_slice();
            if s.len() < 2 {
                return Err(ScoringError::InvalidPolygon {
                    neighborhood: id.into(),
                    message: "position needs lon and lat".into(),
                });
            }
            GeoPoint::new(s[1], s[0]).map_err(|e| ScoringError::InvalidPolygon {
                neighborhood: id.into(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Reads a FeatureCollection of Polygon / MultiPolygon features identified
/// by a `neighborhood_id` property or the feature id.
pub fn parse_neighborhoods(text: &str) -> Result<Vec<Neighborhood>, ScoringError> {
    let fc = FeatureCollection::from_str(text).map_err(|e| ScoringError::Malformed(e.to_string()))?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(fc.features.len());
    for (i, feature) in fc.features.iter().enumerate() {
        let id = match (feature.property("neighborhood_id"), &feature.id) {
            (Some(serde_json::Value::String(s)), _) => s.clone(),
            (Some(serde_json::Value::Number(n)), _) => n.to_string(),
            (_, Some(Id::String(s))) => s.clone(),
            (_, Some(Id::Number(n))) => n.to_string(),
            _ => return Err(ScoringError::Malformed(format!("feature {i} has no neighborhood_id"))),
        };
        if !seen.insert(id.clone()) {
            return Err(ScoringError::DuplicateNeighborhood(id));
        }
        let polygons = match feature.geometry.as_ref().map(|g| &g.value) {
            Some(GeometryValue::Polygon { coordinates }) => vec![coordinates
                .iter()
                .map(|r| positions_to_ring(&id, r))
                .collect::<Result<Vec<_>, _>>()?],
            Some(GeometryValue::MultiPolygon { coordinates }) => coordinates
                .iter()
                .map(|poly| {
                    poly.iter()
                        .map(|r| positions_to_ring(&id, r))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?,
            Some(other) => {
                return Err(ScoringError::InvalidPolygon {
                    neighborhood: id,
                    message: format!("expected Polygon or MultiPolygon, got {}", other.type_name()),
                })
            }
            None => {
                return Err(ScoringError::InvalidPolygon {
                    neighborhood: id,
                    message: "feature has no geometry".into(),
                })
            }
        };
        out.push(Neighborhood::new(id, polygons)?);
    }
    out.sort_by(|a, b| a.neighborhood_id.cmp(&b.neighborhood_id));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodScore {
    pub neighborhood_id: String,
    /// `None` when no segment midpoint falls inside the neighborhood.
    pub score: Option<f64>,
    /// Length-weighted mean penalty of member segments.
    pub penalty: Option<f64>,
    pub covered_length_m: f64,
    pub segment_count: usize,
    pub absent: bool,
}

pub fn neighborhood_scores(
    graph: &SidewalkGraph,
    neighborhoods: &[Neighborhood],
    profile: &GroupProfile,
    normalizer: f64,
) -> Result<BTreeMap<String, NeighborhoodScore>, ScoringError> {
    neighborhood_scores_with(graph, neighborhoods, profile, normalizer, LabelWeighting::TypeLevel)
}

pub fn neighborhood_scores_with(
    graph: &SidewalkGraph,
    neighborhoods: &[Neighborhood],
    profile: &GroupProfile,
    normalizer: f64,
    weighting: LabelWeighting,
) -> Result<BTreeMap<String, NeighborhoodScore>, ScoringError> {
    let segments = segment_scores_with(graph, profile, normalizer, weighting)?;
    let midpoints: Vec<GeoPoint> = graph
        .edges()
        .iter()
        .map(|e| polyline_midpoint(&e.segment.polyline))
        .collect();
    let mut out = BTreeMap::new();
    for hood in neighborhoods {
        let members: Vec<(&Edge, &SegmentScore)> = graph
            .edges()
            .iter()
            .zip(&midpoints)
            .filter(|(_, m)| hood.contains(**m))
            .map(|(e, _)| (e, &segments[e.edge_id()]))
            .collect();
        let covered = exact_sum(members.iter().map(|(e, _)| e.length_m()));
        let (score, penalty) = if covered > 0.0 {
            let weighted = |f: fn(&SegmentScore) -> f64| {
                let sum = exact_sum(members.iter().map(|(e, s)| e.length_m() * f(s)));
                sum / covered
            };
            (
                Some(weighted(|s| s.score).clamp(0.0, 1.0)),
                Some(weighted(|s| s.penalty)),
            )
        } else {
            (None, None)
        };
        out.insert(
            hood.neighborhood_id.clone(),
            NeighborhoodScore {
                neighborhood_id: hood.neighborhood_id.clone(),
                score,
                penalty,
                covered_length_m: covered,
                segment_count: members.len(),
                absent: score.is_none(),
            },
        );
    }
    Ok(out)
}

fn properties(value: serde_json::Value) -> Option<JsonObject> {
    match value {
        serde_json::Value::Object(map) => Some(map),
        _ => unreachable!("properties are built from object literals"),
    }
}

/// Edge-level choropleth document.
pub fn segment_scores_geojson(
    graph: &SidewalkGraph,
    scores: &BTreeMap<String, SegmentScore>,
    profile_id: &str,
    normalizer: f64,
) -> FeatureCollection {
    let features = graph
        .edges()
        .iter()
        .filter_map(|e| scores.get(e.edge_id()).map(|s| (e, s)))
        .map(|(e, s)| {
            let labels: Vec<serde_json::Value> = e
                .labels
                .iter()
                .map(|a| {
                    json!({
                        "label_id": a.label.label_id,
                        "label_type": a.label.label_type,
                        "severity": a.label.severity,
                    })
                })
                .collect();
            Feature {
                geometry: Some(Geometry::new(GeometryValue::new_line_string(
                    e.segment.polyline.iter().map(|p| [p.lon, p.lat]),
                ))),
                id: Some(Id::String(e.edge_id().to_string())),
                properties: properties(json!({
                    "edge_id": e.edge_id(),
                    "kind": e.segment.kind,
                    "length_m": e.length_m(),
                    "score": s.score,
                    "penalty": s.penalty,
                    "profile_id": profile_id,
                    "normalizer": normalizer,
                    "labels": labels,
                })),
                ..Default::default()
            }
        })
        .collect::<Vec<_>>();
    FeatureCollection::new(features)
}

/// Neighborhood-level choropleth document; absent neighborhoods carry a
/// null score.
pub fn neighborhood_scores_geojson(
    neighborhoods: &[Neighborhood],
    scores: &BTreeMap<String, NeighborhoodScore>,
    profile_id: &str,
    normalizer: f64,
) -> FeatureCollection {
    let features = neighborhoods
        .iter()
        .filter_map(|n| scores.get(&n.neighborhood_id).map(|s| (n, s)))
        .map(|(n, s)| Feature {
            geometry: Some(n.geometry()),
            id: Some(Id::String(n.neighborhood_id.clone())),
            properties: properties(json!({
                "neighborhood_id": n.neighborhood_id,
                "score": s.score,
                "penalty": s.penalty,
                "covered_length_m": s.covered_length_m,
                "segment_count": s.segment_count,
                "absent": s.absent,
                "profile_id": profile_id,
                "normalizer": normalizer,
            })),
            ..Default::default()
        })
        .collect::<Vec<_>>();
    FeatureCollection::new(features)
}

/// Pretty JSON with a trailing newline.
pub fn feature_collection_json(fc: &FeatureCollection) -> String {
    let mut s = serde_json::to_string_pretty(fc).expect("feature collection serializes");
    s.push('\n');
    s
}
