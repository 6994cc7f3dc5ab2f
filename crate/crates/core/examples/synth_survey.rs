//! Writes a synthetic survey dataset: 52 images in nine subcategories, 25
//! respondents per mobility group, two "other" respondents, duels from the
//! comparison scheduler and barrier rankings scattered around fixed group
//! means.
//!
//! Usage: cargo run --example synth_survey -- fixtures/survey.json

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sidewalk_access::analysis::schedule_comparisons;
use sidewalk_access::survey::{
    BarrierLabelType, DuelChoice, DuelRecord, ImageMeta, MobilityAid, PassabilityRecord, RankedBarrier, RankingRecord,
    Respondent, Severity, Subcategory, SurveyDataset, Vote,
};

const PER_GROUP: usize = 25;

/// Not-passable share per group and label type. Cane surface-problem is
/// 0.54 and motorized missing-curb-ramp is 0.80.
fn not_passable_share(aid: MobilityAid, t: BarrierLabelType) -> f64 {
    use BarrierLabelType::*;
    use MobilityAid::*;
    match (aid, t) {
        (WalkingCane, Obstacle) => 0.30,
        (WalkingCane, SurfaceProblem) => 0.54,
        (WalkingCane, CurbRamp) => 0.12,
        (WalkingCane, MissingCurbRamp) => 0.36,
        (Walker, Obstacle) => 0.58,
        (Walker, SurfaceProblem) => 0.50,
        (Walker, CurbRamp) => 0.22,
        (Walker, MissingCurbRamp) => 0.46,
        (MobilityScooter, Obstacle) => 0.62,
        (MobilityScooter, SurfaceProblem) => 0.60,
        (MobilityScooter, CurbRamp) => 0.51,
        (MobilityScooter, MissingCurbRamp) => 0.72,
        (ManualWheelchair, Obstacle) => 0.52,
        (ManualWheelchair, SurfaceProblem) => 0.56,
        (ManualWheelchair, CurbRamp) => 0.28,
        (ManualWheelchair, MissingCurbRamp) => 0.76,
        (MotorizedWheelchair, Obstacle) => 0.57,
        (MotorizedWheelchair, SurfaceProblem) => 0.55,
        (MotorizedWheelchair, CurbRamp) => 0.30,
        (MotorizedWheelchair, MissingCurbRamp) => 0.80,
        (Other, _) => 0.5,
    }
}

/// Target mean ranks, rows in `RankedBarrier::ALL` order, columns
/// in canonical group order.
const MEAN_RANKS: [[f64; 5]; 9] = [
    [4.4, 1.6, 1.7, 2.5, 1.8],
    [2.1, 2.3, 2.8, 6.6, 2.0],
    [1.6, 4.8, 5.8, 3.5, 5.7],
    [3.1, 1.8, 3.9, 7.1, 6.1],
    [4.3, 3.0, 5.7, 5.6, 4.7],
    [3.8, 4.7, 6.6, 4.1, 6.7],
    [6.0, 7.2, 7.8, 7.1, 8.8],
    [6.8, 6.8, 9.0, 8.0, 7.9],
    [7.2, 7.5, 8.4, 8.6, 7.1],
];

fn images() -> Vec<ImageMeta> {
    let mut out = Vec::new();
    for sub in Subcategory::ALL {
        let severities: &[Severity] = if *sub == Subcategory::Narrow {
            &[Severity::Low, Severity::Mid]
        } else {
            &[Severity::Low, Severity::Mid, Severity::High]
        };
        for sev in severities {
            for n in 1..=2 {
                out.push(ImageMeta {
                    image_id: format!("{sub}-{sev}-{n}"),
                    label_type: sub.label_type(),
                    subcategory: *sub,
                    severity: *sev,
                    city: Some(if n == 1 { "seattle" } else { "chicago" }.into()),
                });
            }
        }
    }
    out
}

fn severity_weight(s: Severity) -> f64 {
    match s {
        Severity::Low => 0.45,
        Severity::Mid => 1.0,
        Severity::High => 1.55,
    }
}

/// Splits `total` into integer parts proportional to `weights`, each capped
/// at `cap`, by largest remainder.
fn apportion(total: usize, weights: &[f64], cap: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let raw: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<usize> = raw.iter().map(|r| (r.floor() as usize).min(cap)).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        (raw[b] - raw[b].floor())
            .total_cmp(&(raw[a] - raw[a].floor()))
            .then(a.cmp(&b))
    });
    let mut left = total - parts.iter().sum::<usize>();
    while left > 0 {
        for &i in &order {
            if left > 0 && parts[i] < cap {
                parts[i] += 1;
                left -= 1;
            }
        }
    }
    parts
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "fixtures/survey.json".into());
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_517);
    let images = images();

    let mut respondents = BTreeMap::new();
    let mut by_group: Vec<(MobilityAid, Vec<String>)> = Vec::new();
    for (g, aid) in MobilityAid::CANONICAL.iter().enumerate() {
        let ids: Vec<String> = (1..=PER_GROUP).map(|i| format!("r{}{:02}", g + 1, i)).collect();
        for id in &ids {
            respondents.insert(id.clone(), Respondent::new(*aid));
        }
        by_group.push((*aid, ids));
    }
    let others = vec!["r601".to_string(), "r602".to_string()];
    for (id, descriptor) in others.iter().zip(["crutches", "prosthetic leg"]) {
        respondents.insert(
            id.clone(),
            Respondent {
                aid: MobilityAid::Other,
                descriptor: Some(descriptor.into()),
            },
        );
    }
    by_group.push((MobilityAid::Other, others));

    // votes[respondent][image]
    let mut votes: HashMap<String, HashMap<String, Vote>> = HashMap::new();
    for (aid, ids) in &by_group {
        let n = ids.len();
        for t in BarrierLabelType::ALL {
            let imgs: Vec<&ImageMeta> = images.iter().filter(|i| i.label_type == *t).collect();
            let cells = n * imgs.len();
            let not_passable = (not_passable_share(*aid, *t) * cells as f64).round() as usize;
            let weights: Vec<f64> = imgs.iter().map(|i| severity_weight(i.severity)).collect();
            let per_image = apportion(not_passable, &weights, n);
            for (img, np) in imgs.iter().zip(per_image) {
                let unsure = np / 4;
                let mut column: Vec<Vote> = std::iter::repeat_n(Vote::No, np - unsure)
                    .chain(std::iter::repeat_n(Vote::Unsure, unsure))
                    .chain(std::iter::repeat_n(Vote::Yes, n - np))
                    .collect();
                column.shuffle(&mut rng);
                for (id, v) in ids.iter().zip(column) {
                    votes.entry(id.clone()).or_default().insert(img.image_id.clone(), v);
                }
            }
        }
    }

    let mut passability = Vec::new();
    for id in respondents.keys() {
        for img in &images {
            passability.push(PassabilityRecord {
                respondent_id: id.clone(),
                image_id: img.image_id.clone(),
                vote: votes[id][&img.image_id],
            });
        }
    }

    // duels: the more passable image (lower severity) usually wins
    let severity_of: HashMap<&str, Severity> = images.iter().map(|i| (i.image_id.as_str(), i.severity)).collect();
    let mut duels = Vec::new();
    for id in respondents.keys() {
        for sub in Subcategory::ALL {
            let set: Vec<&str> = images
                .iter()
                .filter(|i| i.subcategory == *sub)
                .map(|i| i.image_id.as_str())
                .collect();
            let pairs = schedule_comparisons(&set, &votes[id]).expect("valid image set");
            for (left, right) in pairs {
                let (sl, sr) = (severity_of[left.as_str()], severity_of[right.as_str()]);
                let roll: f64 = rng.gen();
                let choice = if sl == sr || roll < 0.12 {
                    match rng.gen_range(0..3) {
                        0 => DuelChoice::Left,
                        1 => DuelChoice::Right,
                        _ => DuelChoice::Same,
                    }
                } else if (sl < sr) == (roll >= 0.2) {
                    DuelChoice::Left
                } else {
                    DuelChoice::Right
                };
                duels.push(DuelRecord {
                    respondent_id: id.clone(),
                    left,
                    right,
                    choice,
                });
            }
        }
    }

    let mut rankings = Vec::new();
    for (g, (_, ids)) in by_group.iter().enumerate().take(5) {
        for id in ids {
            let mut keyed: Vec<(f64, RankedBarrier)> = RankedBarrier::ALL
                .iter()
                .enumerate()
                .map(|(b, barrier)| {
                    let noise: f64 = (0..3).map(|_| rng.gen_range(-1.0..1.0)).sum::<f64>();
                    (MEAN_RANKS[b][g] + 1.2 * noise, *barrier)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            rankings.push(RankingRecord {
                respondent_id: id.clone(),
                ordering: keyed.into_iter().map(|(_, b)| b).collect(),
            });
        }
    }

    let dataset = SurveyDataset {
        images,
        respondents,
        passability,
        duels,
        rankings,
    };
    dataset.validate().expect("synthetic dataset is valid");
    let mut text = dataset.to_json();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    std::fs::write(&out, text).expect("write survey fixture");
    eprintln!("wrote {out}");
}
