//! Text-in, text-out stages shared by the CLI, the C API and the tests.

use crate::analysis::{analyze, AnalysisOptions};
use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::graph::{
    build_graph, parse_labels, parse_sidewalk_geojson, snap_labels, GraphDocument, GraphParams, SidewalkGraph,
};
use crate::profiles::{
    build_profiles, load_profiles, save_profiles, GroupProfile, LabelWeighting, SHORTEST_PROFILE_ID,
};
use crate::routing::{route, routes_geojson, RouteOptions};
use crate::scoring::{
    compute_normalizer_with, feature_collection_json, neighborhood_scores_geojson, neighborhood_scores_with,
    parse_neighborhoods, segment_scores_geojson, segment_scores_with,
};
use crate::survey::parse_survey_dataset;

pub struct AnalyzeOutput {
    pub profiles_json: String,
    pub report_json: String,
    pub profiles: Vec<GroupProfile>,
}

pub fn run_analyze(survey_json: &str, options: AnalysisOptions) -> Result<AnalyzeOutput> {
    let dataset = parse_survey_dataset(survey_json)?;
    let report = analyze(&dataset, options)?;
    let profiles = build_profiles(&report.confidence)?;
    let mut report_json = report.to_json();
    report_json.push('\n');
    Ok(AnalyzeOutput {
        profiles_json: save_profiles(&profiles),
        report_json,
        profiles,
    })
}

pub fn run_graph(sidewalks_geojson: &str, labels_json: &str, merge_eps_m: f64, snap_max_m: f64) -> Result<String> {
    let inputs = parse_sidewalk_geojson(sidewalks_geojson)?;
    let labels = parse_labels(labels_json)?;
    let graph = build_graph(&inputs, merge_eps_m)?;
    let (graph, unsnapped) = snap_labels(&graph, &labels, snap_max_m)?;
    if !unsnapped.is_empty() {
        log::warn!("{} labels could not be snapped", unsnapped.len());
    }
    let params = GraphParams {
        merge_eps_m,
        max_snap_m: snap_max_m,
    };
    Ok(GraphDocument::from_graph(&graph, params, unsnapped).to_json())
}

pub fn load_graph(graph_json: &str) -> Result<SidewalkGraph> {
    Ok(GraphDocument::from_json(graph_json)?.to_graph()?)
}

/// Finds `profile_id` in a profile document; `shortest` is always present.
pub fn find_profile(profiles_json: &str, profile_id: &str) -> Result<GroupProfile> {
    if profile_id == SHORTEST_PROFILE_ID {
        return Ok(GroupProfile::shortest());
    }
    select_profile(&load_profiles(profiles_json)?, profile_id)
}

pub fn select_profile(profiles: &[GroupProfile], profile_id: &str) -> Result<GroupProfile> {
    if profile_id == SHORTEST_PROFILE_ID {
        return Ok(GroupProfile::shortest());
    }
    profiles
        .iter()
        .find(|p| p.profile_id == profile_id)
        .cloned()
        .ok_or_else(|| Error::UnknownProfile(profile_id.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreLevel {
    Segment,
    Neighborhood,
}

impl std::str::FromStr for ScoreLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "segment" => Ok(ScoreLevel::Segment),
            "neighborhood" => Ok(ScoreLevel::Neighborhood),
            other => Err(format!("level must be segment or neighborhood, got `{other}`")),
        }
    }
}

pub struct ScoreRequest<'a> {
    pub profile_id: &'a str,
    pub level: ScoreLevel,
    pub neighborhoods_geojson: Option<&'a str>,
    pub percentile: f64,
    pub weighting: LabelWeighting,
}

pub fn run_score(graph_json: &str, profiles_json: &str, req: &ScoreRequest<'_>) -> Result<String> {
    let graph = load_graph(graph_json)?;
    let profile = find_profile(profiles_json, req.profile_id)?;
    score_graph(&graph, &profile, req)
}

/// Scores an already loaded graph; `req.profile_id` is not consulted.
pub fn score_graph(graph: &SidewalkGraph, profile: &GroupProfile, req: &ScoreRequest<'_>) -> Result<String> {
    let normalizer = compute_normalizer_with(graph, profile, req.percentile, req.weighting)?;
    let fc = match req.level {
        ScoreLevel::Segment => {
            let scores = segment_scores_with(graph, profile, normalizer, req.weighting)?;
            segment_scores_geojson(graph, &scores, &profile.profile_id, normalizer)
        }
        ScoreLevel::Neighborhood => {
            let text = req
                .neighborhoods_geojson
                .ok_or_else(|| Error::Usage("--level neighborhood requires --neighborhoods".into()))?;
            let hoods = parse_neighborhoods(text)?;
            let scores = neighborhood_scores_with(graph, &hoods, profile, normalizer, req.weighting)?;
            neighborhood_scores_geojson(&hoods, &scores, &profile.profile_id, normalizer)
        }
    };
    Ok(feature_collection_json(&fc))
}

pub fn run_route(
    graph_json: &str,
    profiles_json: &str,
    profile_id: &str,
    from: GeoPoint,
    to: GeoPoint,
    options: &RouteOptions,
) -> Result<String> {
    let graph = load_graph(graph_json)?;
    let profile = find_profile(profiles_json, profile_id)?;
    route_graph(&graph, &profile, from, to, options)
}

pub fn route_graph(
    graph: &SidewalkGraph,
    profile: &GroupProfile,
    from: GeoPoint,
    to: GeoPoint,
    options: &RouteOptions,
) -> Result<String> {
    let r = route(graph, profile, from, to, options)?;
    Ok(feature_collection_json(&routes_geojson(graph, &[r])))
}
