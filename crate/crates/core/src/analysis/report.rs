use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{
    cross_group_mean_ranks, derive_confidence, derive_severity_confidence, kemeny_young_rankings, mean_ranks, q_scores,
    rank_by_q, tally_passability, AnalysisError, AnalysisOptions, ConfidenceTable, ConsensusRanking, PassabilityTally,
    QScoreResult, RankedImage, SeverityConfidence, TallyGrouping,
};
use crate::survey::{
    partition_image_sets, DuelRecord, MobilityAid, RankedBarrier, RankingRecord, Subcategory, SurveyDataset,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubcategoryQTable {
    pub scores: BTreeMap<String, QScoreResult>,
    pub absent: Vec<String>,
    /// Most passable first.
    pub ranking: Vec<RankedImage>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRankings {
    pub respondents: usize,
    pub mean_ranks: BTreeMap<RankedBarrier, f64>,
    pub consensus: Option<ConsensusRanking<RankedBarrier>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tallies {
    pub image: PassabilityTally,
    pub label_type: PassabilityTally,
    pub label_type_x_severity: PassabilityTally,
}

/// Everything the analysis stage exports, in one document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub groups: Vec<MobilityAid>,
    pub tallies: Tallies,
    pub confidence: ConfidenceTable,
    pub severity_confidence: SeverityConfidence,
    pub q_tables: BTreeMap<MobilityAid, BTreeMap<Subcategory, SubcategoryQTable>>,
    pub rankings: BTreeMap<MobilityAid, GroupRankings>,
    /// Unweighted mean of the per-group mean ranks.
    pub cross_group_mean_ranks: BTreeMap<RankedBarrier, f64>,
    /// Consensus over every ranking of the selected groups.
    pub overall_consensus: Option<ConsensusRanking<RankedBarrier>>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn analyze(dataset: &SurveyDataset, options: AnalysisOptions) -> Result<AnalysisReport, AnalysisError> {
    let groups = options.groups();
    let image_tally = tally_passability(dataset, TallyGrouping::Image, options);
    let type_tally = tally_passability(dataset, TallyGrouping::LabelType, options);
    let severity_tally = tally_passability(dataset, TallyGrouping::LabelTypeXSeverity, options);
    let confidence = derive_confidence(&type_tally)?;
    let severity_confidence = derive_severity_confidence(&severity_tally)?;

    let sets = partition_image_sets(dataset);
    let subcategory_of: HashMap<&str, Subcategory> = dataset
        .images
        .iter()
        .map(|img| (img.image_id.as_str(), img.subcategory))
        .collect();

    let mut q_tables = BTreeMap::new();
    for group in &groups {
        let group_duels: Vec<&DuelRecord> = dataset
            .duels
            .iter()
            .filter(|d| dataset.aid_of(&d.respondent_id) == Some(*group))
            .collect();
        let mut per_subcategory = BTreeMap::new();
        for (subcategory, images) in &sets {
            if images.is_empty() {
                continue;
            }
            let duels: Vec<DuelRecord> = group_duels
                .iter()
                .filter(|d| subcategory_of.get(d.left.as_str()) == Some(subcategory))
                .map(|d| (*d).clone())
                .collect();
            let ids: Vec<&str> = images.iter().map(|img| img.image_id.as_str()).collect();
            let table = q_scores(&duels, &ids);
            let ranking = rank_by_q(&table);
            per_subcategory.insert(
                *subcategory,
                SubcategoryQTable {
                    scores: table.scores,
                    absent: table.absent,
                    ranking,
                },
            );
        }
        q_tables.insert(*group, per_subcategory);
    }

    let mut rankings = BTreeMap::new();
    let mut all_rankings: Vec<RankingRecord> = Vec::new();
    for group in &groups {
        let records: Vec<RankingRecord> = dataset
            .rankings
            .iter()
            .filter(|r| dataset.aid_of(&r.respondent_id) == Some(*group))
            .cloned()
            .collect();
        let consensus = if records.is_empty() {
            None
        } else {
            Some(kemeny_young_rankings(&records)?)
        };
        rankings.insert(
            *group,
            GroupRankings {
                respondents: records.len(),
                mean_ranks: mean_ranks(&records),
                consensus,
            },
        );
        all_rankings.extend(records);
    }
    let per_group_means: BTreeMap<MobilityAid, BTreeMap<RankedBarrier, f64>> = rankings
        .iter()
        .filter(|(_, r)| r.respondents > 0)
        .map(|(g, r)| (*g, r.mean_ranks.clone()))
        .collect();
    let overall_consensus = if all_rankings.is_empty() {
        None
    } else {
        Some(kemeny_young_rankings(&all_rankings)?)
    };

    Ok(AnalysisReport {
        groups,
        tallies: Tallies {
            image: image_tally,
            label_type: type_tally,
            label_type_x_severity: severity_tally,
        },
        confidence,
        severity_confidence,
        q_tables,
        cross_group_mean_ranks: cross_group_mean_ranks(&per_group_means),
        rankings,
        overall_consensus,
    })
}
