//! End-to-end run over the committed fixtures. Set `UPDATE_GOLDEN=1` to
//! rewrite `fixtures/golden/`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::Value;
use sidewalk_access::analysis::AnalysisOptions;
use sidewalk_access::pipeline::{run_analyze, run_graph, run_route, run_score, ScoreLevel, ScoreRequest};
use sidewalk_access::profiles::LabelWeighting;
use sidewalk_access::routing::RouteOptions;
use sidewalk_access::scoring::DEFAULT_PERCENTILE;

use super::{fixture, fixture_dir, ll};

pub const PROFILE_IDS: [&str; 6] = [
    "shortest",
    "walking_cane",
    "walker",
    "mobility_scooter",
    "manual_wheelchair",
    "motorized_wheelchair",
];

pub fn golden_dir() -> PathBuf {
    fixture_dir().join("golden")
}

/// Origin and destination of the golden routes, `lat,lon`.
pub fn route_endpoints() -> (String, String) {
    let (a, b) = (ll(0.0, 0.0), ll(80.0, 20.0));
    (format!("{},{}", a.lat, a.lon), format!("{},{}", b.lat, b.lon))
}

/// File name to contents for every output of the pipeline.
pub fn run_pipeline() -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let analyzed = run_analyze(&fixture("survey.json"), AnalysisOptions::default()).expect("analyze");
    let graph = run_graph(&fixture("sidewalks.geojson"), &fixture("labels.json"), 0.5, 20.0).expect("graph");
    let hoods = fixture("neighborhoods.geojson");
    let (from, to) = route_endpoints();

    for id in PROFILE_IDS {
        for (level, name) in [
            (ScoreLevel::Segment, "segment"),
            (ScoreLevel::Neighborhood, "neighborhood"),
        ] {
            let req = ScoreRequest {
                profile_id: id,
                level,
                neighborhoods_geojson: Some(&hoods),
                percentile: DEFAULT_PERCENTILE,
                weighting: LabelWeighting::TypeLevel,
            };
            let text = run_score(&graph, &analyzed.profiles_json, &req).expect("score");
            out.insert(format!("scores-{name}-{id}.geojson"), text);
        }
        let text = run_route(
            &graph,
            &analyzed.profiles_json,
            id,
            from.parse().unwrap(),
            to.parse().unwrap(),
            &RouteOptions::default(),
        )
        .expect("route");
        out.insert(format!("route-{id}.geojson"), text);
    }
    out.insert("profiles.json".into(), analyzed.profiles_json);
    out.insert("report.json".into(), analyzed.report_json);
    out.insert("graph.json".into(), graph);
    out
}

pub fn check_or_update(outputs: &BTreeMap<String, String>) {
    let dir = golden_dir();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(&dir).unwrap();
        for (name, text) in outputs {
            std::fs::write(dir.join(name), text).unwrap();
        }
        return;
    }
    let mut committed: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("golden dir {}: {e}", dir.display()))
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    committed.sort();
    assert_eq!(
        committed,
        outputs.keys().cloned().collect::<Vec<_>>(),
        "golden file set"
    );
    for (name, text) in outputs {
        let expected = std::fs::read_to_string(dir.join(name)).unwrap();
        assert!(expected == *text, "{name} differs from the golden copy");
    }
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

/// Recomputes golden numbers from the raw inputs.
pub fn check_oracles(outputs: &BTreeMap<String, String>) {
    // C = share of non-Yes votes per (group, label type), counted directly
    let survey = json(&fixture("survey.json"));
    let type_of: BTreeMap<&str, &str> = survey["images"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| (i["image_id"].as_str().unwrap(), i["label_type"].as_str().unwrap()))
        .collect();
    let aid_of = |r: &str| -> String {
        let v = &survey["respondents"][r];
        v.as_str()
            .map(str::to_string)
            .unwrap_or_else(|| v["aid"].as_str().unwrap().to_string())
    };
    let mut counts: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    for rec in survey["passability"].as_array().unwrap() {
        let key = (
            aid_of(rec["respondent_id"].as_str().unwrap()),
            type_of[rec["image_id"].as_str().unwrap()].to_string(),
        );
        let c = counts.entry(key).or_default();
        c.1 += 1;
        if rec["vote"] != "yes" {
            c.0 += 1;
        }
    }
    let profiles = json(&outputs["profiles.json"]);
    let profiles = profiles.as_array().unwrap();
    assert_eq!(profiles.len(), 5);
    for p in profiles {
        let group = p["group"].as_str().unwrap();
        for (t, c) in p["confidence"].as_object().unwrap() {
            let (np, total) = counts[&(group.to_string(), t.clone())];
            assert_eq!(c.as_f64().unwrap(), np as f64 / total as f64, "{group}/{t}");
        }
    }

    // segment scores from the labels in the graph document
    let graph = json(&outputs["graph.json"]);
    for p in profiles {
        let id = p["profile_id"].as_str().unwrap();
        let conf = &p["confidence"];
        let penalties: BTreeMap<&str, f64> = graph["edges"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| {
                let pen = e["labels"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|l| conf[l["label_type"].as_str().unwrap()].as_f64().unwrap())
                    .sum::<f64>();
                (e["edge_id"].as_str().unwrap(), pen)
            })
            .collect();
        let mut positive: Vec<f64> = penalties.values().copied().filter(|p| *p > 0.0).collect();
        positive.sort_by(f64::total_cmp);
        let rank = (0.95 * positive.len() as f64).ceil() as usize;
        let norm = positive[rank - 1];
        let scores = json(&outputs[&format!("scores-segment-{id}.geojson")]);
        for f in scores["features"].as_array().unwrap() {
            let props = &f["properties"];
            let edge = props["edge_id"].as_str().unwrap();
            let expected = (1.0 - penalties[edge] / norm).clamp(0.0, 1.0);
            let got = props["score"].as_f64().unwrap();
            assert!((got - expected).abs() < 1e-12, "{id}/{edge}: {got} vs {expected}");
            assert!((props["normalizer"].as_f64().unwrap() - norm).abs() < 1e-12);
        }
    }

    // the planted crossing: cane goes straight, motorized detours
    let edges_of = |id: &str| -> Vec<String> {
        let fc = json(&outputs[&format!("route-{id}.geojson")]);
        fc["features"][0]["properties"]["edges"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e.as_str().unwrap().to_string())
            .collect()
    };
    assert!(edges_of("walking_cane").contains(&"x-pq-corner".to_string()));
    assert!(edges_of("shortest").contains(&"x-pq-corner".to_string()));
    let motor = edges_of("motorized_wheelchair");
    assert!(!motor.contains(&"x-pq-corner".to_string()));
    assert!(motor.contains(&"x-pq-midblock".to_string()));
}
