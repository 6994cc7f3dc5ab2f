mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sidewalk_access::analysis::{
    analyze, derive_confidence, kemeny_young, kemeny_young_rankings, q_scores, schedule_comparisons, tally_passability,
    AnalysisOptions, TallyGrouping, TallyKey,
};
use sidewalk_access::survey::{
    parse_survey_dataset, partition_image_sets, BarrierLabelType, DuelChoice, DuelRecord, ImageMeta, MobilityAid,
    PassabilityRecord, RankedBarrier, RankingRecord, Respondent, Severity, Subcategory, SurveyDataset, Vote,
};

use common::*;

fn fixture_dataset() -> SurveyDataset {
    parse_survey_dataset(&fixture("survey.json")).expect("fixture parses")
}

/// Six images in two subcategories, three respondents, every record kind.
fn small_dataset() -> SurveyDataset {
    let mut images = Vec::new();
    for sub in [Subcategory::Vegetation, Subcategory::CurbRamp] {
        for sev in Severity::ALL {
            images.push(ImageMeta {
                image_id: format!("{sub}-{sev}"),
                label_type: sub.label_type(),
                subcategory: sub,
                severity: *sev,
                city: None,
            });
        }
    }
    let respondents: BTreeMap<String, Respondent> = [
        ("a", MobilityAid::Walker),
        ("b", MobilityAid::ManualWheelchair),
        ("c", MobilityAid::Other),
    ]
    .into_iter()
    .map(|(id, aid)| (id.to_string(), Respondent::new(aid)))
    .collect();
    let mut passability = Vec::new();
    for (k, r) in respondents.keys().enumerate() {
        for (i, img) in images.iter().enumerate() {
            passability.push(PassabilityRecord {
                respondent_id: r.clone(),
                image_id: img.image_id.clone(),
                vote: [Vote::Yes, Vote::No, Vote::Unsure][(i + k) % 3],
            });
        }
    }
    let duels = vec![
        DuelRecord {
            respondent_id: "a".into(),
            left: images[0].image_id.clone(),
            right: images[1].image_id.clone(),
            choice: DuelChoice::Left,
        },
        DuelRecord {
            respondent_id: "b".into(),
            left: images[3].image_id.clone(),
            right: images[5].image_id.clone(),
            choice: DuelChoice::Same,
        },
    ];
    let rankings = vec![RankingRecord {
        respondent_id: "a".into(),
        ordering: RankedBarrier::ALL.to_vec(),
    }];
    SurveyDataset {
        images,
        respondents,
        passability,
        duels,
        rankings,
    }
}

const MUTATIONS: usize = 16;

/// Applies mutation `m`, each breaking one documented invariant.
fn mutate(doc: &mut Value, m: usize, k: usize) {
    let n_img = doc["images"].as_array().unwrap().len();
    let n_votes = doc["passability"].as_array().unwrap().len();
    let n_duels = doc["duels"].as_array().unwrap().len();
    let (ki, kv, kd) = (k % n_img, k % n_votes, k % n_duels);
    match m {
        0 => {
            let other = doc["images"][(ki + 1) % n_img]["image_id"].clone();
            doc["images"][ki]["image_id"] = other;
        }
        1 => {
            let t = if doc["images"][ki]["label_type"] == "obstacle" {
                "surface_problem"
            } else {
                "obstacle"
            };
            doc["images"][ki]["label_type"] = json!(t);
        }
        2 => doc["passability"][kv]["vote"] = json!("maybe"),
        3 => doc["respondents"]["b"] = json!("skateboard"),
        4 => doc["passability"][kv]["respondent_id"] = json!("nobody"),
        5 => doc["passability"][kv]["image_id"] = json!("no-such-image"),
        6 => {
            let dup = doc["passability"][kv].clone();
            doc["passability"].as_array_mut().unwrap().push(dup);
        }
        7 => {
            let left = doc["duels"][kd]["left"].clone();
            doc["duels"][kd]["right"] = left;
        }
        8 => doc["duels"][0]["right"] = doc["images"][4]["image_id"].clone(),
        9 => {
            let first = doc["rankings"][0]["ordering"][0].clone();
            doc["rankings"][0]["ordering"][1 + k % 8] = first;
        }
        10 => {
            doc["rankings"][0]["ordering"].as_array_mut().unwrap().pop();
        }
        11 => doc["images"][ki]["subcategory"] = json!("potholes"),
        12 => doc["duels"][kd]["left"] = json!("no-such-image"),
        13 => doc["rankings"][0]["respondent_id"] = json!("nobody"),
        14 => {
            doc["images"][ki].as_object_mut().unwrap().remove("severity");
        }
        15 => doc["duels"][kd]["choice"] = json!("both"),
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_mutation_is_rejected(m in 0..MUTATIONS, k in 0usize..64) {
        let mut doc: Value = serde_json::from_str(&small_dataset().to_json()).unwrap();
        mutate(&mut doc, m, k);
        let err = parse_survey_dataset(&doc.to_string()).expect_err("mutated document must fail");
        prop_assert!(!err.path.is_empty(), "mutation {} gave no path: {:?}", m, err);
    }

    #[test]
    fn generated_documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ds = small_dataset();
        ds.passability.shuffle(&mut rng);
        for rec in &mut ds.passability {
            rec.vote = [Vote::Yes, Vote::No, Vote::Unsure][rng.gen_range(0..3)];
        }
        let parsed = parse_survey_dataset(&ds.to_json()).unwrap();
        prop_assert_eq!(parsed, ds);
    }

    #[test]
    fn scheduled_pairs_share_a_group(codes in proptest::collection::vec(0usize..3, 2..=6)) {
        let ids: Vec<String> = (0..codes.len()).map(|i| format!("i{i}")).collect();
        let votes: HashMap<String, Vote> = ids
            .iter()
            .zip(&codes)
            .map(|(id, c)| (id.clone(), [Vote::Yes, Vote::No, Vote::Unsure][*c]))
            .collect();
        let pairs = schedule_comparisons(&ids, &votes).unwrap();
        let unique: BTreeSet<_> = pairs.iter().collect();
        prop_assert_eq!(unique.len(), pairs.len());
        for (a, b) in &pairs {
            prop_assert!(a < b);
            let passable = |id: &str| votes[id] != Vote::No;
            let impassable = |id: &str| votes[id] != Vote::Yes;
            prop_assert!((passable(a) && passable(b)) || (impassable(a) && impassable(b)));
        }
    }

    #[test]
    fn q_scores_bounded_and_match_oracle(seed in any::<u64>(), images in 2usize..7, count in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let duels = random_duels(&mut rng, images, count, true);
        let table = q_scores(&duels, &[] as &[&str]);
        let oracle = q_oracle(&duels);
        for (id, r) in &table.scores {
            prop_assert!((0.0..=10.0).contains(&r.q));
            prop_assert!((r.q - oracle[id]).abs() < 1e-9);
            prop_assert_eq!(r.wins + r.losses + r.ties, duels.iter().filter(|d| &d.left == id || &d.right == id).count() as u64);
        }
    }
}

#[test]
fn fixture_set_sizes() {
    let ds = fixture_dataset();
    assert_eq!(ds.images.len(), 52);
    let sets = partition_image_sets(&ds);
    assert_eq!(sets.len(), 9);
    for (sub, imgs) in &sets {
        let expected = if *sub == Subcategory::Narrow { 4 } else { 6 };
        assert_eq!(imgs.len(), expected, "{sub}");
    }
}

#[test]
fn partition_ignores_input_order() {
    let ds = fixture_dataset();
    let expected = partition_image_sets(&ds);

    // sort-then-group oracle
    let mut sorted = ds.images.clone();
    sorted.sort_by(|a, b| (a.subcategory, &a.image_id).cmp(&(b.subcategory, &b.image_id)));
    let mut oracle: BTreeMap<Subcategory, Vec<ImageMeta>> = Subcategory::ALL.iter().map(|s| (*s, Vec::new())).collect();
    for img in sorted {
        oracle.get_mut(&img.subcategory).unwrap().push(img);
    }
    assert_eq!(expected, oracle);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let mut shuffled = ds.clone();
        shuffled.images.shuffle(&mut rng);
        assert_eq!(partition_image_sets(&shuffled), expected);
    }
    let covered: usize = expected.values().map(Vec::len).sum();
    assert_eq!(covered, ds.images.len());
}

#[test]
fn tally_conservation_and_complement() {
    let ds = fixture_dataset();
    let tally = tally_passability(&ds, TallyGrouping::LabelType, AnalysisOptions::default());
    let table = derive_confidence(&tally).unwrap();
    let type_of: HashMap<&str, BarrierLabelType> =
        ds.images.iter().map(|i| (i.image_id.as_str(), i.label_type)).collect();
    for aid in MobilityAid::CANONICAL {
        for t in BarrierLabelType::ALL {
            let votes: Vec<Vote> = ds
                .passability
                .iter()
                .filter(|r| ds.aid_of(&r.respondent_id) == Some(aid) && type_of[r.image_id.as_str()] == *t)
                .map(|r| r.vote)
                .collect();
            let counts = tally.get(aid, &TallyKey::LabelType(*t)).unwrap();
            assert_eq!(counts.total(), votes.len() as u64);
            assert_eq!(counts.yes, votes.iter().filter(|v| **v == Vote::Yes).count() as u64);
            let c = table.get(aid, *t).unwrap();
            assert_eq!(c + counts.yes_ratio().unwrap(), 1.0, "{aid}/{t}");
        }
    }
    let with_other = tally_passability(&ds, TallyGrouping::Image, AnalysisOptions { include_other: true });
    assert!(with_other.groups().contains(&MobilityAid::Other));
}

#[test]
fn absent_cell_is_an_error() {
    let mut ds = small_dataset();
    ds.passability.retain(|r| r.respondent_id != "a");
    let tally = tally_passability(&ds, TallyGrouping::LabelType, AnalysisOptions::default());
    let err = derive_confidence(&tally).unwrap_err();
    assert_eq!(err.kind(), "absent_cell");
}

#[test]
fn kemeny_beats_inputs_and_random_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let m = rng.gen_range(5..=9);
        let count = rng.gen_range(2..=15);
        let orderings = random_orderings(&mut rng, m, count);
        let best = kemeny_young(&orderings).unwrap();
        for o in &orderings {
            assert!(best.total_tau <= total_tau(o, &orderings));
        }
        for candidate in random_orderings(&mut rng, m, 1000) {
            assert!(best.total_tau <= total_tau(&candidate, &orderings));
        }
    }
}

#[test]
fn kemeny_rejects_bad_input() {
    assert_eq!(kemeny_young::<u8>(&[]).unwrap_err().kind(), "empty_input");
    assert_eq!(
        kemeny_young(&[vec![1, 2], vec![1, 3]]).unwrap_err().kind(),
        "inconsistent_rankings"
    );
    let big: Vec<usize> = (0..17).collect();
    assert_eq!(kemeny_young(&[big]).unwrap_err().kind(), "too_many_items");
}

#[test]
fn fixture_analysis() {
    let ds = fixture_dataset();
    let report = analyze(&ds, AnalysisOptions::default()).unwrap();
    let c = |aid, t| report.confidence.get(aid, t).unwrap();
    assert_eq!(c(MobilityAid::WalkingCane, BarrierLabelType::SurfaceProblem), 0.54);
    assert_eq!(
        c(MobilityAid::MotorizedWheelchair, BarrierLabelType::MissingCurbRamp),
        0.8
    );
    assert!(c(MobilityAid::WalkingCane, BarrierLabelType::MissingCurbRamp) < 0.8);

    let cane: Vec<RankingRecord> = ds
        .rankings
        .iter()
        .filter(|r| ds.aid_of(&r.respondent_id) == Some(MobilityAid::WalkingCane))
        .cloned()
        .collect();
    let consensus = kemeny_young_rankings(&cane).unwrap();
    let as_idx: Vec<Vec<usize>> = cane
        .iter()
        .map(|r| {
            r.ordering
                .iter()
                .map(|b| RankedBarrier::ALL.iter().position(|x| x == b).unwrap())
                .collect()
        })
        .collect();
    let idx: Vec<usize> = consensus
        .ordering
        .iter()
        .map(|b| RankedBarrier::ALL.iter().position(|x| x == b).unwrap())
        .collect();
    assert_eq!(consensus.total_tau, total_tau(&idx, &as_idx));
}
