//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use sidewalk_access::geo::{haversine_m, GeoPoint};
use sidewalk_access::graph::{build_graph, snap_labels, LabelPoint, SegmentInput, SegmentKind, SidewalkGraph};
use sidewalk_access::profiles::{Confidence, GroupProfile, ProfileGroup, Provenance};
use sidewalk_access::survey::{BarrierLabelType, DuelChoice, DuelRecord, Severity};

pub const LAT0: f64 = 47.61;
pub const LON0: f64 = -122.33;
const R: f64 = 6_371_008.8;

/// Local meters (east, north) around the test origin.
pub fn ll(x: f64, y: f64) -> GeoPoint {
    GeoPoint {
        lat: LAT0 + (y / R).to_degrees(),
        lon: LON0 + (x / (R * LAT0.to_radians().cos())).to_degrees(),
    }
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap_or_else(|e| panic!("read fixture {name}: {e}"))
}

pub fn seg(id: &str, kind: SegmentKind, pts: &[(f64, f64)]) -> SegmentInput {
    SegmentInput {
        edge_id: Some(id.to_string()),
        kind,
        polyline: pts.iter().map(|&(x, y)| ll(x, y)).collect(),
    }
}

pub fn label(id: &str, label_type: BarrierLabelType, raw: u8, at: GeoPoint) -> LabelPoint {
    LabelPoint {
        label_id: id.to_string(),
        label_type,
        severity_raw: Some(raw),
        severity: Severity::from_raw(raw).expect("raw severity in 1..=5"),
        position: at,
    }
}

pub fn profile(id: &str, c: [f64; 4]) -> GroupProfile {
    GroupProfile {
        profile_id: id.to_string(),
        group: ProfileGroup::Custom,
        confidence: Confidence {
            obstacle: c[0],
            surface_problem: c[1],
            curb_ramp: c[2],
            missing_curb_ramp: c[3],
        },
        provenance: Provenance::Derived,
    }
}

pub fn random_profile<R: Rng>(rng: &mut R, id: &str) -> GroupProfile {
    let mut c = [0.0; 4];
    for v in &mut c {
        // a few exact zeros and ones keep the boundaries covered
        *v = match rng.gen_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..1.0),
        };
    }
    profile(id, c)
}

pub fn admissible_types(kind: SegmentKind) -> &'static [BarrierLabelType] {
    match kind {
        SegmentKind::Sidewalk => &[BarrierLabelType::Obstacle, BarrierLabelType::SurfaceProblem],
        SegmentKind::Crossing => &[BarrierLabelType::CurbRamp, BarrierLabelType::MissingCurbRamp],
    }
}

/// Point at fraction `t` along the straight segment a-b, in local meters.
fn lerp(a: (f64, f64), b: (f64, f64), t: f64) -> (f64, f64) {
    (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t)
}

pub struct GridSpec {
    pub n: usize,
    pub spacing_m: f64,
    pub jitter_m: f64,
    /// Chance that an edge is left out (the grid may then be disconnected).
    pub drop_rate: f64,
    /// Chance of a second, bent edge between the same two nodes.
    pub parallel_rate: f64,
    pub max_labels_per_edge: usize,
}

impl GridSpec {
    pub fn square(n: usize) -> GridSpec {
        GridSpec {
            n,
            spacing_m: 30.0,
            jitter_m: 6.0,
            drop_rate: 0.0,
            parallel_rate: 0.15,
            max_labels_per_edge: 3,
        }
    }
}

pub struct Grid {
    pub graph: SidewalkGraph,
    /// Node index of lattice point (row, col), row-major.
    pub lattice: Vec<usize>,
    pub segments: Vec<SegmentInput>,
    pub labels: Vec<LabelPoint>,
}

/// Random lattice network: horizontal edges are sidewalks, vertical ones
/// crossings, labels sit on the straight part of their edge.
pub fn random_grid<R: Rng>(rng: &mut R, spec: &GridSpec) -> Grid {
    let n = spec.n;
    let pos: Vec<(f64, f64)> = (0..n * n)
        .map(|k| {
            let (r, c) = (k / n, k % n);
            let j = spec.jitter_m;
            (
                c as f64 * spec.spacing_m + rng.gen_range(-j..=j),
                r as f64 * spec.spacing_m + rng.gen_range(-j..=j),
            )
        })
        .collect();

    let mut segments = Vec::new();
    let mut labels = Vec::new();
    let mut add = |rng: &mut R, id: String, kind: SegmentKind, a: (f64, f64), b: (f64, f64), bent: bool| {
        let pts = if bent {
            let mid = lerp(a, b, 0.5);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len = (dx * dx + dy * dy).sqrt();
            let off = rng.gen_range(4.0..8.0) / len;
            vec![a, (mid.0 - dy * off, mid.1 + dx * off), b]
        } else {
            vec![a, b]
        };
        let count = rng.gen_range(0..=spec.max_labels_per_edge);
        for k in 0..count {
            let t = rng.gen_range(0.3..0.7);
            let (p, q) = (pts[0], pts[1]);
            let at = lerp(p, q, t);
            let types = admissible_types(kind);
            let label_type = types[rng.gen_range(0..types.len())];
            labels.push(label(
                &format!("{id}-l{k}"),
                label_type,
                rng.gen_range(1..=5),
                ll(at.0, at.1),
            ));
        }
        segments.push(SegmentInput {
            edge_id: Some(id),
            kind,
            polyline: pts.iter().map(|&(x, y)| ll(x, y)).collect(),
        });
    };
    for r in 0..n {
        for c in 0..n {
            let k = r * n + c;
            let mut links = Vec::new();
            if c + 1 < n {
                links.push((format!("h{r}{c}"), SegmentKind::Sidewalk, k + 1));
            }
            if r + 1 < n {
                links.push((format!("v{r}{c}"), SegmentKind::Crossing, k + n));
            }
            for (id, kind, other) in links {
                if rng.gen_bool(spec.drop_rate) {
                    continue;
                }
                add(rng, id.clone(), kind, pos[k], pos[other], false);
                if rng.gen_bool(spec.parallel_rate) {
                    add(rng, format!("{id}b"), kind, pos[k], pos[other], true);
                }
            }
        }
    }
    segments.shuffle(rng);
    labels.shuffle(rng);

    let base = build_graph(&segments, 0.5).expect("grid builds");
    let (graph, unsnapped) = snap_labels(&base, &labels, 20.0).expect("labels snap");
    assert!(unsnapped.is_empty(), "grid labels all lie on their edge");
    let lattice = pos
        .iter()
        .map(|&(x, y)| graph.nearest_node(ll(x, y)).expect("non-empty").0)
        .collect();
    Grid {
        graph,
        lattice,
        segments,
        labels,
    }
}

/// Least left-to-right sum of `weights` over every simple path from `o` to
/// `t`, by exhaustive depth-first enumeration.
pub fn exhaustive_min_cost(graph: &SidewalkGraph, weights: &[f64], o: usize, t: usize) -> Option<f64> {
    fn dfs(g: &SidewalkGraph, w: &[f64], at: usize, t: usize, acc: f64, seen: &mut Vec<bool>, best: &mut Option<f64>) {
        if at == t {
            if best.is_none_or(|b| acc < b) {
                *best = Some(acc);
            }
            return;
        }
        for &(idx, next) in g.neighbors(at) {
            if seen[next] {
                continue;
            }
            seen[next] = true;
            dfs(g, w, next, t, acc + w[idx], seen, best);
            seen[next] = false;
        }
    }
    let mut seen = vec![false; graph.nodes().len()];
    seen[o] = true;
    let mut best = None;
    dfs(graph, weights, o, t, 0.0, &mut seen, &mut best);
    best
}

/// Bellman-Ford distances from `o` (sums in path order).
pub fn bellman_ford(graph: &SidewalkGraph, weights: &[f64], o: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.nodes().len()];
    dist[o] = 0.0;
    for _ in 0..graph.nodes().len() {
        let mut changed = false;
        for (i, e) in graph.edges().iter().enumerate() {
            for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                let cand = dist[a] + weights[i];
                if cand < dist[b] {
                    dist[b] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Nearest node by scanning every node with the haversine distance.
pub fn linear_nearest(graph: &SidewalkGraph, p: GeoPoint) -> (usize, f64) {
    graph
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (i, haversine_m(p, n.position)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("non-empty graph")
}

/// Q-scores computed directly from the definition in floating point.
pub fn q_oracle(duels: &[DuelRecord]) -> BTreeMap<String, f64> {
    let mut ids: Vec<&str> = duels.iter().flat_map(|d| [d.left.as_str(), d.right.as_str()]).collect();
    ids.sort_unstable();
    ids.dedup();
    let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let m = ids.len();
    let mut beat = vec![vec![0u64; m]; m];
    let mut ties = vec![0u64; m];
    for d in duels {
        let (l, r) = (pos[d.left.as_str()], pos[d.right.as_str()]);
        match d.choice {
            DuelChoice::Left => beat[l][r] += 1,
            DuelChoice::Right => beat[r][l] += 1,
            DuelChoice::Same => {
                ties[l] += 1;
                ties[r] += 1;
            }
        }
    }
    let wins: Vec<u64> = (0..m).map(|i| beat[i].iter().sum()).collect();
    let losses: Vec<u64> = (0..m).map(|i| (0..m).map(|j| beat[j][i]).sum()).collect();
    let total: Vec<f64> = (0..m).map(|i| (wins[i] + losses[i] + ties[i]) as f64).collect();
    let w: Vec<f64> = (0..m).map(|i| wins[i] as f64 / total[i]).collect();
    let l: Vec<f64> = (0..m).map(|i| losses[i] as f64 / total[i]).collect();
    let mean = |v: Vec<f64>| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    (0..m)
        .map(|i| {
            let beaten = (0..m).filter(|&j| beat[i][j] > beat[j][i]).map(|j| w[j]).collect();
            let beaters = (0..m).filter(|&j| beat[j][i] > beat[i][j]).map(|j| l[j]).collect();
            let q = 10.0 / 3.0 * (w[i] + mean(beaten) - mean(beaters) + 1.0);
            (ids[i].to_string(), q)
        })
        .collect()
}

pub fn random_duels<R: Rng>(rng: &mut R, images: usize, count: usize, allow_ties: bool) -> Vec<DuelRecord> {
    (0..count)
        .map(|k| {
            let a = rng.gen_range(0..images);
            let mut b = rng.gen_range(0..images - 1);
            if b >= a {
                b += 1;
            }
            let choice = match rng.gen_range(0..if allow_ties { 3 } else { 2 }) {
                0 => DuelChoice::Left,
                1 => DuelChoice::Right,
                _ => DuelChoice::Same,
            };
            DuelRecord {
                respondent_id: format!("r{}", k % 7),
                left: format!("img{a}"),
                right: format!("img{b}"),
                choice,
            }
        })
        .collect()
}

fn discordant_pairs(a: &[usize], b: &[usize]) -> u64 {
    let pos_b: HashMap<usize, usize> = b.iter().enumerate().map(|(i, x)| (*x, i)).collect();
    let mut n = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if pos_b[&a[i]] > pos_b[&a[j]] {
                n += 1;
            }
        }
    }
    n
}

/// Least total Kendall tau distance over all m! orderings.
pub fn brute_force_kemeny(orderings: &[Vec<usize>]) -> u64 {
    fn permute(k: usize, items: &mut Vec<usize>, orderings: &[Vec<usize>], best: &mut u64) {
        if k == items.len() {
            let total = orderings.iter().map(|o| discordant_pairs(items, o)).sum();
            *best = (*best).min(total);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(k + 1, items, orderings, best);
            items.swap(k, i);
        }
    }
    let mut items = orderings[0].clone();
    let mut best = u64::MAX;
    permute(0, &mut items, orderings, &mut best);
    best
}

pub fn random_orderings<R: Rng>(rng: &mut R, m: usize, count: usize) -> Vec<Vec<usize>> {
    (0..count)
        .map(|_| {
            let mut o: Vec<usize> = (0..m).collect();
            o.shuffle(rng);
            o
        })
        .collect()
}

/// Total Kendall tau of `candidate` against every ordering.
pub fn total_tau(candidate: &[usize], orderings: &[Vec<usize>]) -> u64 {
    orderings.iter().map(|o| discordant_pairs(candidate, o)).sum()
}
pub mod golden;
