//! Writes the 20-segment sidewalk fixture, its labels and two
//! neighborhoods (plus one with no sidewalks).
//!
//! Between A and B the metric shortest path takes a 20 m crossing with a
//! missing curb ramp; a label-free 21 m mid-block crossing joins the same
//! corners, so a profile detours exactly when 0.1 * C(missing_curb_ramp) * 20
//! exceeds 1 m, i.e. C > 0.5.
//!
//! Usage: cargo run --example synth_city -- fixtures

use std::path::PathBuf;

use serde_json::{json, Value};

const LAT0: f64 = 47.61;
const LON0: f64 = -122.33;
const R: f64 = 6_371_008.8;

/// Local meters (east, north).
type Xy = (f64, f64);

/// Local meters (east, north) to `[lon, lat]`.
fn ll(x: f64, y: f64) -> [f64; 2] {
    let lat = LAT0 + (y / R).to_degrees();
    let lon = LON0 + (x / (R * LAT0.to_radians().cos())).to_degrees();
    [round9(lon), round9(lat)]
}

fn round9(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));

    let a = (0.0, 0.0);
    let p = (40.0, 0.0);
    let q = (40.0, 20.0);
    let b = (80.0, 20.0);
    let c = (0.0, 25.0);
    let d = (85.0, 0.0);
    let e = (0.0, 60.0);
    let f = (40.0, 60.0);
    let g = (80.0, 60.0);
    let h = (120.0, 0.0);
    let i = (120.0, 20.0);
    let j = (120.0, 60.0);
    let k = (0.0, -40.0);
    // bend that makes the mid-block crossing 21 m long
    let bend = (40.0 + (10.5f64 * 10.5 - 100.0).sqrt(), 10.0);

    let segments: Vec<(&str, &str, Vec<Xy>)> = vec![
        ("s-ap", "sidewalk", vec![a, p]),
        ("x-pq-corner", "crossing", vec![p, q]),
        ("x-pq-midblock", "crossing", vec![p, bend, q]),
        ("s-qb", "sidewalk", vec![q, b]),
        ("s-pd", "sidewalk", vec![p, d]),
        ("x-db", "crossing", vec![d, b]),
        ("x-ac", "crossing", vec![a, c]),
        ("s-cq", "sidewalk", vec![c, q]),
        ("s-ce", "sidewalk", vec![c, e]),
        ("s-qf", "sidewalk", vec![q, f]),
        ("s-bg", "sidewalk", vec![b, g]),
        ("s-ef", "sidewalk", vec![e, f]),
        ("s-fg", "sidewalk", vec![f, (60.0, 60.5), g]),
        ("s-dh", "sidewalk", vec![d, h]),
        ("x-hi", "crossing", vec![h, i]),
        ("s-bi", "sidewalk", vec![b, i]),
        ("s-ij", "sidewalk", vec![i, j]),
        ("s-gj", "sidewalk", vec![g, j]),
        ("s-ak", "sidewalk", vec![a, k]),
        ("s-island", "sidewalk", vec![(500.0, 0.0), (540.0, 0.0)]),
    ];
    let features: Vec<Value> = segments
        .iter()
        .map(|(id, kind, pts)| {
            json!({
                "type": "Feature",
                "properties": { "edge_id": id, "kind": kind },
                "geometry": {
                    "type": "LineString",
                    "coordinates": pts.iter().map(|(x, y)| ll(*x, *y)).collect::<Vec<_>>(),
                }
            })
        })
        .collect();
    let sidewalks = json!({ "type": "FeatureCollection", "features": features });

    let labels: Vec<(&str, &str, Option<u8>, Xy)> = vec![
        ("L01", "SurfaceProblem", Some(2), (20.0, 1.5)),
        ("L02", "NoCurbRamp", Some(4), (39.5, 10.0)),
        ("L03", "CurbRamp", Some(3), (83.0, 10.0)),
        ("L04", "NoCurbRamp", Some(5), (-0.8, 12.0)),
        ("L05", "Obstacle", Some(3), (20.0, 61.0)),
        ("L06", "SurfaceProblem", Some(4), (55.0, 59.0)),
        ("L07", "SurfaceProblem", Some(1), (65.0, 61.2)),
        ("L08", "Obstacle", Some(5), (41.0, 40.0)),
        ("L09", "Obstacle", None, (121.0, 40.0)),
        ("L10", "SurfaceProblem", Some(3), (60.0, 21.0)),
        ("L11", "Obstacle", Some(2), (500.0, 500.0)),
        ("L12", "NoCurbRamp", Some(3), (60.0, -30.0)),
    ];
    let labels: Vec<Value> = labels
        .iter()
        .map(|(id, t, sev, (x, y))| {
            let [lng, lat] = ll(*x, *y);
            json!({ "label_id": id, "label_type": t, "severity": sev, "lat": lat, "lng": lng })
        })
        .collect();

    let square = |x0: f64, x1: f64, y0: f64, y1: f64| -> Value {
        json!([[ll(x0, y0), ll(x1, y0), ll(x1, y1), ll(x0, y1), ll(x0, y0)]])
    };
    let hoods = json!({
        "type": "FeatureCollection",
        "features": [
            { "type": "Feature", "properties": { "neighborhood_id": "west", "name": "West Slope" },
              "geometry": { "type": "Polygon", "coordinates": square(-10.0, 61.0, -50.0, 70.0) } },
            { "type": "Feature", "properties": { "neighborhood_id": "east", "name": "East Flats" },
              "geometry": { "type": "Polygon", "coordinates": square(61.0, 130.0, -50.0, 70.0) } },
            { "type": "Feature", "properties": { "neighborhood_id": "harbor", "name": "Harbor" },
              "geometry": { "type": "Polygon", "coordinates": square(300.0, 400.0, 100.0, 200.0) } }
        ]
    });

    let write = |name: &str, v: &Value| {
        let mut s = serde_json::to_string_pretty(v).expect("fixture serializes");
        s.push('\n');
        std::fs::write(dir.join(name), s).expect("write fixture");
    };
    write("sidewalks.geojson", &sidewalks);
    write("labels.json", &json!(labels));
    write("neighborhoods.geojson", &hoods);
    eprintln!("wrote fixtures to {}", dir.display());
}
