use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::survey::{DuelChoice, DuelRecord};

/// Duel outcome summary and Q-score for one image within its set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QScoreResult {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
    pub win_ratio: f64,
    pub loss_ratio: f64,
    pub q: f64,
    /// Exact value of `q`.
    #[serde(skip)]
    pub q_exact: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QScoreTable {
    pub scores: BTreeMap<String, QScoreResult>,
    /// Images of the set that never appeared in a duel.
    pub absent: Vec<String>,
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn mean(values: impl Iterator<Item = BigRational>) -> BigRational {
    let mut sum = BigRational::zero();
    let mut n = 0u64;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        sum
    } else {
        sum / BigRational::from_integer(BigInt::from(n))
    }
}

/// Q-scores for the duels of one (group, subcategory).
///
/// Each duel is one win/loss event (or a tie for both images when the
/// respondent answered "same"); events are pooled across respondents. For
/// image i with win ratio W and loss ratio L (ties in the denominator):
///
/// `Q = 10/3 * (W_i + mean W over images i beat - mean L over images that beat i + 1)`
///
/// where "beat" means more wins than losses against that opponent, and the
/// mean over an empty set is 0. `image_set` lists the images expected in the
/// set; those without duels are reported in `absent`.
pub fn q_scores<S: AsRef<str>>(duels: &[DuelRecord], image_set: &[S]) -> QScoreTable {
    // head_to_head[(a, b)] = times a was preferred over b
    let mut head_to_head: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    let mut ties: BTreeMap<&str, u64> = BTreeMap::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();

    for duel in duels {
        let (l, r) = (duel.left.as_str(), duel.right.as_str());
        seen.insert(l);
        seen.insert(r);
        match duel.choice {
            DuelChoice::Left => *head_to_head.entry((l, r)).or_default() += 1,
            DuelChoice::Right => *head_to_head.entry((r, l)).or_default() += 1,
            DuelChoice::Same => {
                *ties.entry(l).or_default() += 1;
                *ties.entry(r).or_default() += 1;
            }
        }
    }

    let h2h = |a: &str, b: &str| head_to_head.get(&(a, b)).copied().unwrap_or(0);

    let mut win_r: BTreeMap<&str, BigRational> = BTreeMap::new();
    let mut loss_r: BTreeMap<&str, BigRational> = BTreeMap::new();
    let mut tallies: BTreeMap<&str, (u64, u64, u64)> = BTreeMap::new();
    for &img in &seen {
        let wins: u64 = seen.iter().map(|&o| h2h(img, o)).sum();
        let losses: u64 = seen.iter().map(|&o| h2h(o, img)).sum();
        let t = ties.get(img).copied().unwrap_or(0);
        let n = wins + losses + t;
        win_r.insert(img, ratio(wins, n));
        loss_r.insert(img, ratio(losses, n));
        tallies.insert(img, (wins, losses, t));
    }

    let ten_thirds = ratio(10, 3);
    let one = BigRational::from_integer(BigInt::from(1));
    let mut scores = BTreeMap::new();
    for &img in &seen {
        let beaten = seen.iter().filter(|&&o| h2h(img, o) > h2h(o, img));
        let beaters = seen.iter().filter(|&&o| h2h(o, img) > h2h(img, o));
        let q_exact = &ten_thirds
            * (&win_r[img] + mean(beaten.map(|o| win_r[o].clone())) - mean(beaters.map(|o| loss_r[o].clone())) + &one);
        let (wins, losses, t) = tallies[img];
        scores.insert(
            img.to_string(),
            QScoreResult {
                wins,
                losses,
                ties: t,
                win_ratio: win_r[img].to_f64().unwrap_or(f64::NAN),
                loss_ratio: loss_r[img].to_f64().unwrap_or(f64::NAN),
                q: q_exact.to_f64().unwrap_or(f64::NAN),
                q_exact,
            },
        );
    }

    let absent: Vec<String> = image_set
        .iter()
        .map(|s| s.as_ref())
        .filter(|id| !seen.contains(id))
        .map(str::to_string)
        .collect();
    for id in &absent {
        log::warn!("image `{id}` has no duels; omitted from Q-scores");
    }

    QScoreTable { scores, absent }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedImage {
    pub image_id: String,
    pub q: f64,
    /// True when another image in the set has exactly the same Q.
    pub tied: bool,
}

/// Orders images from most to least passable by Q; exact ties fall back to
/// image id order and are flagged.
pub fn rank_by_q(table: &QScoreTable) -> Vec<RankedImage> {
    let mut entries: Vec<(&String, &QScoreResult)> = table.scores.iter().collect();
    entries.sort_by(|a, b| b.1.q_exact.cmp(&a.1.q_exact).then_with(|| a.0.cmp(b.0)));
    let mut out: Vec<RankedImage> = entries
        .iter()
        .map(|(id, r)| RankedImage {
            image_id: (*id).clone(),
            q: r.q,
            tied: false,
        })
        .collect();
    for i in 1..entries.len() {
        if entries[i].1.q_exact == entries[i - 1].1.q_exact {
            out[i].tied = true;
            out[i - 1].tied = true;
        }
    }
    out
}
