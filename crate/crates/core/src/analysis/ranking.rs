use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::AnalysisError;
use crate::survey::{RankedBarrier, RankingRecord};

/// Largest item count the exact subset DP accepts (2^16 states).
pub const MAX_KEMENY_ITEMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsensusRanking<T> {
    /// Most difficult first.
    pub ordering: Vec<T>,
    /// Sum of Kendall tau distances from `ordering` to every input.
    pub total_tau: u64,
}

/// Number of item pairs the two orderings disagree on. Both must rank the
/// same items.
pub fn kendall_tau_distance<T: Ord>(a: &[T], b: &[T]) -> u64 {
    let pos: BTreeMap<&T, usize> = b.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mapped: Vec<usize> = a.iter().map(|x| pos[x]).collect();
    let mut discordant = 0;
    for i in 0..mapped.len() {
        for j in i + 1..mapped.len() {
            if mapped[i] > mapped[j] {
                discordant += 1;
            }
        }
    }
    discordant
}

/// Exact Kemeny-Young consensus.
///
/// Builds the pairwise preference matrix and runs a DP over subsets of
/// already-placed items: `best[S]` is the least number of disagreements
/// needed to order the items outside `S`, given everything in `S` comes
/// first. Among optimal orderings the lexicographically smallest (by `T`'s
/// order) is returned.
pub fn kemeny_young<T: Ord + Clone>(orderings: &[Vec<T>]) -> Result<ConsensusRanking<T>, AnalysisError> {
    let first = orderings.first().ok_or(AnalysisError::EmptyInput("ranking list"))?;
    let items: Vec<T> = first.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let m = items.len();
    if m > MAX_KEMENY_ITEMS {
        return Err(AnalysisError::TooManyItems {
            got: m,
            max: MAX_KEMENY_ITEMS,
        });
    }
    let index: BTreeMap<&T, usize> = items.iter().enumerate().map(|(i, x)| (x, i)).collect();

    // prefer[a][b] = number of rankings placing a before b
    let mut prefer = vec![vec![0u64; m]; m];
    for (k, ordering) in orderings.iter().enumerate() {
        let idx: Option<Vec<usize>> = ordering.iter().map(|x| index.get(x).copied()).collect();
        let idx = match idx {
            Some(idx) if idx.len() == m && idx.iter().collect::<BTreeSet<_>>().len() == m => idx,
            _ => return Err(AnalysisError::InconsistentRankings { index: k }),
        };
        for i in 0..m {
            for j in i + 1..m {
                prefer[idx[i]][idx[j]] += 1;
            }
        }
    }

    let full: usize = (1 << m) - 1;
    // cost of putting x next when `placed` is already fixed: every remaining y
    // that voters put before x is a disagreement
    let place_cost = |x: usize, placed: usize| -> u64 {
        (0..m)
            .filter(|&y| y != x && placed & (1 << y) == 0)
            .map(|y| prefer[y][x])
            .sum()
    };

    let mut best = vec![u64::MAX; full + 1];
    best[full] = 0;
    for placed in (0..full).rev() {
        let mut b = u64::MAX;
        for x in 0..m {
            if placed & (1 << x) == 0 {
                let c = place_cost(x, placed) + best[placed | (1 << x)];
                b = b.min(c);
            }
        }
        best[placed] = b;
    }

    let mut ordering = Vec::with_capacity(m);
    let mut placed = 0usize;
    while placed != full {
        let next = (0..m)
            .find(|&x| placed & (1 << x) == 0 && place_cost(x, placed) + best[placed | (1 << x)] == best[placed])
            .expect("an optimal continuation exists");
        ordering.push(items[next].clone());
        placed |= 1 << next;
    }

    Ok(ConsensusRanking {
        ordering,
        total_tau: best[0],
    })
}

/// Kemeny-Young over barrier rankings; ties between optimal orderings break
/// on the barrier names.
pub fn kemeny_young_rankings(rankings: &[RankingRecord]) -> Result<ConsensusRanking<RankedBarrier>, AnalysisError> {
    let named: Vec<Vec<&'static str>> = rankings
        .iter()
        .map(|r| r.ordering.iter().map(|b| b.as_str()).collect())
        .collect();
    let consensus = kemeny_young(&named)?;
    Ok(ConsensusRanking {
        ordering: consensus
            .ordering
            .iter()
            .map(|name| name.parse().expect("names round-trip"))
            .collect(),
        total_tau: consensus.total_tau,
    })
}

/// Mean 1-based position of every item across the orderings.
pub fn mean_ranks_of<T: Ord + Clone>(orderings: &[Vec<T>]) -> BTreeMap<T, f64> {
    let mut sums: BTreeMap<T, (f64, u64)> = BTreeMap::new();
    for ordering in orderings {
        for (pos, item) in ordering.iter().enumerate() {
            let e = sums.entry(item.clone()).or_insert((0.0, 0));
            e.0 += (pos + 1) as f64;
            e.1 += 1;
        }
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

pub fn mean_ranks(rankings: &[RankingRecord]) -> BTreeMap<RankedBarrier, f64> {
    let orderings: Vec<Vec<RankedBarrier>> = rankings.iter().map(|r| r.ordering.clone()).collect();
    mean_ranks_of(&orderings)
}

/// Unweighted mean of per-group mean ranks, the "average rank across groups".
pub fn cross_group_mean_ranks<G, T: Ord + Clone>(per_group: &BTreeMap<G, BTreeMap<T, f64>>) -> BTreeMap<T, f64> {
    let mut sums: BTreeMap<T, (f64, u64)> = BTreeMap::new();
    for means in per_group.values() {
        for (item, m) in means {
            let e = sums.entry(item.clone()).or_insert((0.0, 0));
            e.0 += m;
            e.1 += 1;
        }
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn tau_basics() {
        assert_eq!(kendall_tau_distance(&v("abc"), &v("abc")), 0);
        assert_eq!(kendall_tau_distance(&v("abc"), &v("cba")), 3);
        assert_eq!(kendall_tau_distance(&v("abc"), &v("bca")), 2);
    }

    #[test]
    fn single_input_is_its_own_consensus() {
        let r = kemeny_young(&[v("dbca")]).unwrap();
        assert_eq!(r.ordering, v("dbca"));
        assert_eq!(r.total_tau, 0);
    }

    #[test]
    fn condorcet_cycle_breaks_lexicographically() {
        // brute force over 3! orderings: abc, bca, cab score 4; the others 5
        let r = kemeny_young(&[v("abc"), v("bca"), v("cab")]).unwrap();
        assert_eq!(r.ordering, v("abc"));
        assert_eq!(r.total_tau, 4);
    }

    #[test]
    fn errors() {
        assert_eq!(
            kemeny_young::<char>(&[]),
            Err(AnalysisError::EmptyInput("ranking list"))
        );
        let big: Vec<u32> = (0..17).collect();
        assert!(matches!(
            kemeny_young(&[big]),
            Err(AnalysisError::TooManyItems { got: 17, .. })
        ));
        assert_eq!(
            kemeny_young(&[v("abc"), v("abd")]),
            Err(AnalysisError::InconsistentRankings { index: 1 })
        );
        assert_eq!(
            kemeny_young(&[v("abc"), v("ab")]),
            Err(AnalysisError::InconsistentRankings { index: 1 })
        );
    }

    #[test]
    fn single_ranking_means_are_positions() {
        let means = mean_ranks_of(&[v("cab")]);
        assert_eq!(means[&'c'], 1.0);
        assert_eq!(means[&'a'], 2.0);
        assert_eq!(means[&'b'], 3.0);
    }

    #[test]
    fn cross_group_average() {
        let mut per_group = BTreeMap::new();
        for (g, m) in [(0, 4.4), (1, 1.6), (2, 1.7), (3, 2.5), (4, 1.8)] {
            per_group.insert(g, BTreeMap::from([("missing_curb_ramp", m)]));
        }
        let avg = cross_group_mean_ranks(&per_group);
        assert!((avg["missing_curb_ramp"] - 2.4).abs() < 1e-9);
    }
}
