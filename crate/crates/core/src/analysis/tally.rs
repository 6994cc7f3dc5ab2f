use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

use super::{AnalysisError, AnalysisOptions};
use crate::survey::{BarrierLabelType, MobilityAid, Severity, SurveyDataset, Vote};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TallyGrouping {
    Image,
    LabelType,
    LabelTypeXSeverity,
}

impl TallyGrouping {
    pub fn as_str(&self) -> &'static str {
        match self {
            TallyGrouping::Image => "image",
            TallyGrouping::LabelType => "label_type",
            TallyGrouping::LabelTypeXSeverity => "label_type_x_severity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TallyKey {
    Image(String),
    LabelType(BarrierLabelType),
    LabelTypeSeverity(BarrierLabelType, Severity),
}

impl fmt::Display for TallyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TallyKey::Image(id) => f.write_str(id),
            TallyKey::LabelType(t) => write!(f, "{t}"),
            TallyKey::LabelTypeSeverity(t, s) => write!(f, "{t}:{s}"),
        }
    }
}

impl Serialize for TallyKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VoteCounts {
    pub yes: u64,
    pub no: u64,
    pub unsure: u64,
}

impl VoteCounts {
    pub fn total(&self) -> u64 {
        self.yes + self.no + self.unsure
    }

    pub fn add(&mut self, vote: Vote) {
        match vote {
            Vote::Yes => self.yes += 1,
            Vote::No => self.no += 1,
            Vote::Unsure => self.unsure += 1,
        }
    }

    fn ratio(&self, count: u64) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| count as f64 / total as f64)
    }

    pub fn yes_ratio(&self) -> Option<f64> {
        self.ratio(self.yes)
    }

    pub fn no_ratio(&self) -> Option<f64> {
        self.ratio(self.no)
    }

    pub fn unsure_ratio(&self) -> Option<f64> {
        self.ratio(self.unsure)
    }

    /// Share of No + Unsure votes; `None` when nobody voted.
    pub fn not_passable_ratio(&self) -> Option<f64> {
        self.ratio(self.no + self.unsure)
    }
}

/// One exported tally row. Ratios are `None` (serialized as null) when the
/// cell has no votes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TallyCell {
    pub group: MobilityAid,
    pub key: TallyKey,
    pub yes: u64,
    pub no: u64,
    pub unsure: u64,
    pub total: u64,
    pub yes_r: Option<f64>,
    pub no_r: Option<f64>,
    pub unsure_r: Option<f64>,
    pub absent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassabilityTally {
    pub grouping: TallyGrouping,
    counts: BTreeMap<(MobilityAid, TallyKey), VoteCounts>,
}

impl PassabilityTally {
    pub fn get(&self, group: MobilityAid, key: &TallyKey) -> Option<&VoteCounts> {
        self.counts.get(&(group, key.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(MobilityAid, TallyKey), &VoteCounts)> {
        self.counts.iter()
    }

    pub fn groups(&self) -> Vec<MobilityAid> {
        let mut groups: Vec<_> = self.counts.keys().map(|(g, _)| *g).collect();
        groups.dedup();
        groups
    }

    pub fn cells(&self) -> Vec<TallyCell> {
        self.counts
            .iter()
            .map(|((group, key), c)| TallyCell {
                group: *group,
                key: key.clone(),
                yes: c.yes,
                no: c.no,
                unsure: c.unsure,
                total: c.total(),
                yes_r: c.yes_ratio(),
                no_r: c.no_ratio(),
                unsure_r: c.unsure_ratio(),
                absent: c.total() == 0,
            })
            .collect()
    }
}

impl Serialize for PassabilityTally {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            grouping: &'a str,
            cells: Vec<TallyCell>,
        }
        Repr {
            grouping: self.grouping.as_str(),
            cells: self.cells(),
        }
        .serialize(serializer)
    }
}

/// Counts Yes/No/Unsure votes per (group, key). Every selected group gets a
/// cell for every key; cells nobody voted on stay at zero and report absent
/// ratios.
pub fn tally_passability(
    dataset: &SurveyDataset,
    grouping: TallyGrouping,
    options: AnalysisOptions,
) -> PassabilityTally {
    let groups = options.groups();
    let keys: Vec<TallyKey> = match grouping {
        TallyGrouping::Image => dataset
            .images
            .iter()
            .map(|img| TallyKey::Image(img.image_id.clone()))
            .collect(),
        TallyGrouping::LabelType => BarrierLabelType::ALL.iter().map(|t| TallyKey::LabelType(*t)).collect(),
        TallyGrouping::LabelTypeXSeverity => BarrierLabelType::ALL
            .iter()
            .flat_map(|t| Severity::ALL.iter().map(move |s| TallyKey::LabelTypeSeverity(*t, *s)))
            .collect(),
    };

    let mut counts = BTreeMap::new();
    for group in &groups {
        for key in &keys {
            counts.insert((*group, key.clone()), VoteCounts::default());
        }
    }

    let images: HashMap<&str, _> = dataset.images.iter().map(|img| (img.image_id.as_str(), img)).collect();
    for rec in &dataset.passability {
        let Some(aid) = dataset.aid_of(&rec.respondent_id) else {
            continue;
        };
        let Some(img) = images.get(rec.image_id.as_str()) else {
            continue;
        };
        let key = match grouping {
            TallyGrouping::Image => TallyKey::Image(img.image_id.clone()),
            TallyGrouping::LabelType => TallyKey::LabelType(img.label_type),
            TallyGrouping::LabelTypeXSeverity => TallyKey::LabelTypeSeverity(img.label_type, img.severity),
        };
        if let Some(cell) = counts.get_mut(&(aid, key)) {
            cell.add(rec.vote);
        }
    }

    PassabilityTally { grouping, counts }
}

/// Confidence that a barrier type is not passable, per (group, label type).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceTable {
    cells: BTreeMap<(MobilityAid, BarrierLabelType), f64>,
}

impl ConfidenceTable {
    pub fn from_cells(cells: impl IntoIterator<Item = ((MobilityAid, BarrierLabelType), f64)>) -> Self {
        ConfidenceTable {
            cells: cells.into_iter().collect(),
        }
    }

    pub fn get(&self, group: MobilityAid, label_type: BarrierLabelType) -> Option<f64> {
        self.cells.get(&(group, label_type)).copied()
    }

    pub fn groups(&self) -> Vec<MobilityAid> {
        let mut groups: Vec<_> = self.cells.keys().map(|(g, _)| *g).collect();
        groups.dedup();
        groups
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(MobilityAid, BarrierLabelType), &f64)> {
        self.cells.iter()
    }
}

impl Serialize for ConfidenceTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut nested: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
        for ((group, label_type), c) in &self.cells {
            nested
                .entry(group.as_str())
                .or_default()
                .insert(label_type.as_str(), *c);
        }
        nested.serialize(serializer)
    }
}

/// C = (No + Unsure) / total for every (group, label type) cell of a
/// label-type tally.
pub fn derive_confidence(tally: &PassabilityTally) -> Result<ConfidenceTable, AnalysisError> {
    if tally.grouping != TallyGrouping::LabelType {
        return Err(AnalysisError::WrongGrouping(tally.grouping.as_str()));
    }
    let mut cells = BTreeMap::new();
    for ((group, key), counts) in tally.iter() {
        let TallyKey::LabelType(label_type) = key else {
            continue;
        };
        let c = counts.not_passable_ratio().ok_or(AnalysisError::AbsentCell {
            group: *group,
            label_type: *label_type,
        })?;
        cells.insert((*group, *label_type), c);
    }
    Ok(ConfidenceTable { cells })
}

/// Severity-resolved confidence. Cells without votes are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeverityConfidence {
    cells: BTreeMap<(MobilityAid, BarrierLabelType, Severity), Option<f64>>,
}

impl SeverityConfidence {
    pub fn get(&self, group: MobilityAid, label_type: BarrierLabelType, severity: Severity) -> Option<f64> {
        self.cells.get(&(group, label_type, severity)).copied().flatten()
    }
}

impl Serialize for SeverityConfidence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut nested: BTreeMap<&str, BTreeMap<&str, BTreeMap<&str, Option<f64>>>> = BTreeMap::new();
        for ((group, label_type, severity), c) in &self.cells {
            nested
                .entry(group.as_str())
                .or_default()
                .entry(label_type.as_str())
                .or_default()
                .insert(severity.as_str(), *c);
        }
        nested.serialize(serializer)
    }
}

pub fn derive_severity_confidence(tally: &PassabilityTally) -> Result<SeverityConfidence, AnalysisError> {
    if tally.grouping != TallyGrouping::LabelTypeXSeverity {
        return Err(AnalysisError::WrongGrouping(tally.grouping.as_str()));
    }
    let cells = tally
        .iter()
        .filter_map(|((group, key), counts)| match key {
            TallyKey::LabelTypeSeverity(t, s) => Some(((*group, *t, *s), counts.not_passable_ratio())),
            _ => None,
        })
        .collect();
    Ok(SeverityConfidence { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::{ImageMeta, PassabilityRecord, Respondent, Subcategory};

    fn image(id: &str, sub: Subcategory, sev: Severity) -> ImageMeta {
        ImageMeta {
            image_id: id.into(),
            label_type: sub.label_type(),
            subcategory: sub,
            severity: sev,
            city: None,
        }
    }

    fn vote(r: &str, i: &str, v: Vote) -> PassabilityRecord {
        PassabilityRecord {
            respondent_id: r.into(),
            image_id: i.into(),
            vote: v,
        }
    }

    /// Five respondents, three images, hand-tabulated below.
    fn five_respondents() -> SurveyDataset {
        use Vote::*;
        let images = vec![
            image("A1", Subcategory::FireHydrantPole, Severity::Low),
            image("B1", Subcategory::CracksHeightDiff, Severity::Mid),
            image("B2", Subcategory::CracksHeightDiff, Severity::High),
        ];
        let respondents = [
            ("r1", MobilityAid::WalkingCane),
            ("r2", MobilityAid::WalkingCane),
            ("r3", MobilityAid::Walker),
            ("r4", MobilityAid::Walker),
            ("r5", MobilityAid::Other),
        ]
        .into_iter()
        .map(|(id, aid)| (id.to_string(), Respondent::new(aid)))
        .collect();
        let passability = vec![
            vote("r1", "A1", Yes),
            vote("r1", "B1", No),
            vote("r1", "B2", Unsure),
            vote("r2", "A1", Yes),
            vote("r2", "B1", Yes),
            vote("r2", "B2", No),
            vote("r3", "A1", No),
            vote("r3", "B1", Unsure),
            vote("r4", "B2", No),
            vote("r5", "A1", No),
        ];
        let ds = SurveyDataset {
            images,
            respondents,
            passability,
            duels: vec![],
            rankings: vec![],
        };
        ds.validate().unwrap();
        ds
    }

    fn counts(yes: u64, no: u64, unsure: u64) -> VoteCounts {
        VoteCounts { yes, no, unsure }
    }

    #[test]
    fn hand_tabulated_counts() {
        let ds = five_respondents();
        let opts = AnalysisOptions::default();

        let by_image = tally_passability(&ds, TallyGrouping::Image, opts);
        let cane = MobilityAid::WalkingCane;
        let walker = MobilityAid::Walker;
        assert_eq!(
            by_image.get(cane, &TallyKey::Image("A1".into())),
            Some(&counts(2, 0, 0))
        );
        assert_eq!(
            by_image.get(cane, &TallyKey::Image("B1".into())),
            Some(&counts(1, 1, 0))
        );
        assert_eq!(
            by_image.get(walker, &TallyKey::Image("A1".into())),
            Some(&counts(0, 1, 0))
        );
        assert_eq!(
            by_image.get(walker, &TallyKey::Image("B2".into())),
            Some(&counts(0, 1, 0))
        );
        // `other` excluded by default
        assert!(by_image
            .get(MobilityAid::Other, &TallyKey::Image("A1".into()))
            .is_none());

        let by_type = tally_passability(&ds, TallyGrouping::LabelType, opts);
        let surface = TallyKey::LabelType(BarrierLabelType::SurfaceProblem);
        assert_eq!(by_type.get(cane, &surface), Some(&counts(1, 2, 1)));
        assert_eq!(by_type.get(walker, &surface), Some(&counts(0, 1, 1)));
        let ramps = TallyKey::LabelType(BarrierLabelType::CurbRamp);
        let empty = by_type.get(cane, &ramps).unwrap();
        assert_eq!(empty.total(), 0);
        assert_eq!(empty.yes_ratio(), None);

        let by_sev = tally_passability(&ds, TallyGrouping::LabelTypeXSeverity, opts);
        let key = TallyKey::LabelTypeSeverity(BarrierLabelType::SurfaceProblem, Severity::High);
        assert_eq!(by_sev.get(cane, &key), Some(&counts(0, 1, 1)));

        let with_other = tally_passability(&ds, TallyGrouping::Image, AnalysisOptions { include_other: true });
        assert_eq!(
            with_other.get(MobilityAid::Other, &TallyKey::Image("A1".into())),
            Some(&counts(0, 1, 0))
        );
    }

    #[test]
    fn all_yes_group() {
        let mut ds = five_respondents();
        ds.passability.retain(|r| r.respondent_id == "r1");
        for r in &mut ds.passability {
            r.vote = Vote::Yes;
        }
        let t = tally_passability(&ds, TallyGrouping::Image, AnalysisOptions::default());
        for img in &ds.images {
            let c = t
                .get(MobilityAid::WalkingCane, &TallyKey::Image(img.image_id.clone()))
                .unwrap();
            assert_eq!(c.yes_ratio(), Some(1.0));
        }
    }

    #[test]
    fn confidence_requires_label_type_grouping() {
        let ds = five_respondents();
        let t = tally_passability(&ds, TallyGrouping::Image, AnalysisOptions::default());
        assert!(matches!(derive_confidence(&t), Err(AnalysisError::WrongGrouping(_))));
    }

    #[test]
    fn confidence_reports_absent_cell() {
        let ds = five_respondents();
        let t = tally_passability(&ds, TallyGrouping::LabelType, AnalysisOptions::default());
        let err = derive_confidence(&t).unwrap_err();
        assert!(matches!(err, AnalysisError::AbsentCell { .. }));
    }

    #[test]
    fn severity_confidence_keeps_absences() {
        let ds = five_respondents();
        let t = tally_passability(&ds, TallyGrouping::LabelTypeXSeverity, AnalysisOptions::default());
        let sc = derive_severity_confidence(&t).unwrap();
        assert_eq!(
            sc.get(
                MobilityAid::WalkingCane,
                BarrierLabelType::SurfaceProblem,
                Severity::Mid
            ),
            Some(0.5)
        );
        assert_eq!(
            sc.get(MobilityAid::WalkingCane, BarrierLabelType::CurbRamp, Severity::Low),
            None
        );
    }
}
