//! Statistical aggregation over survey datasets: passability tallies,
//! confidence-not-passable derivation, comparison scheduling, Q-scores,
//! mean ranks and Kemeny-Young consensus.

mod qscore;
mod ranking;
mod report;
mod scheduler;
mod tally;

use thiserror::Error;

use crate::survey::{BarrierLabelType, MobilityAid};

pub use qscore::{q_scores, rank_by_q, QScoreResult, QScoreTable, RankedImage};
pub use ranking::{
    cross_group_mean_ranks, kemeny_young, kemeny_young_rankings, kendall_tau_distance, mean_ranks, mean_ranks_of,
    ConsensusRanking, MAX_KEMENY_ITEMS,
};
pub use report::{analyze, AnalysisReport, GroupRankings, SubcategoryQTable};
pub use scheduler::schedule_comparisons;
pub use tally::{
    derive_confidence, derive_severity_confidence, tally_passability, ConfidenceTable, PassabilityTally,
    SeverityConfidence, TallyCell, TallyGrouping, TallyKey, VoteCounts,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no votes for group `{group}` on label type `{label_type}`")]
    AbsentCell {
        group: MobilityAid,
        label_type: BarrierLabelType,
    },
    #[error("confidence derivation needs a label_type tally, got {0}")]
    WrongGrouping(&'static str),
    #[error("image `{0}` in the comparison set has no vote")]
    UnvotedImage(String),
    #[error("comparison sets hold 2 to 6 images, got {0}")]
    SetSize(usize),
    #[error("{0} is empty")]
    EmptyInput(&'static str),
    #[error("exact consensus supports at most {max} items, got {got}")]
    TooManyItems { got: usize, max: usize },
    #[error("ranking {index} is not a permutation of the items in ranking 0")]
    InconsistentRankings { index: usize },
}

impl AnalysisError {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalysisError::AbsentCell { .. } => "absent_cell",
            AnalysisError::WrongGrouping(_) => "wrong_grouping",
            AnalysisError::UnvotedImage(_) => "unvoted_image",
            AnalysisError::SetSize(_) => "set_size",
            AnalysisError::EmptyInput(_) => "empty_input",
            AnalysisError::TooManyItems { .. } => "too_many_items",
            AnalysisError::InconsistentRankings { .. } => "inconsistent_rankings",
        }
    }
}

/// Which respondent groups enter the analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Include respondents whose aid is `other` as a sixth group.
    pub include_other: bool,
}

impl AnalysisOptions {
    pub fn groups(&self) -> Vec<MobilityAid> {
        let mut groups = MobilityAid::CANONICAL.to_vec();
        if self.include_other {
            groups.push(MobilityAid::Other);
        }
        groups
    }
}
