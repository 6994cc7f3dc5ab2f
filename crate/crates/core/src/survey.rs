//! Survey instrument types and validated ingestion of survey dataset documents.
//!
//! A dataset document is a single JSON object with the top-level keys
//! `images`, `respondents`, `passability`, `duels` and `rankings`. The JSON
//! Schema for it ships in `schema/survey.schema.json`; every parse error
//! carries both the instance path (`$.passability[3].vote`) and the schema
//! pointer it violates (`#/properties/passability/items/properties/vote`).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownVariant;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(UnknownVariant {
                        type_name: stringify!($name),
                        value: other.to_string(),
                    }),
                }
            }
        }
    };
}

/// Returned when a string does not name a member of one of the closed enumerations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {type_name} `{value}`")]
pub struct UnknownVariant {
    pub type_name: &'static str,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityAid {
    WalkingCane,
    Walker,
    MobilityScooter,
    ManualWheelchair,
    MotorizedWheelchair,
    Other,
}

string_enum!(MobilityAid {
    WalkingCane => "walking_cane",
    Walker => "walker",
    MobilityScooter => "mobility_scooter",
    ManualWheelchair => "manual_wheelchair",
    MotorizedWheelchair => "motorized_wheelchair",
    Other => "other",
});

impl MobilityAid {
    /// The five groups analysed by default; `other` is opt-in.
    pub const CANONICAL: [MobilityAid; 5] = [
        MobilityAid::WalkingCane,
        MobilityAid::Walker,
        MobilityAid::MobilityScooter,
        MobilityAid::ManualWheelchair,
        MobilityAid::MotorizedWheelchair,
    ];

    pub fn is_canonical(&self) -> bool {
        !matches!(self, MobilityAid::Other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierLabelType {
    Obstacle,
    SurfaceProblem,
    CurbRamp,
    MissingCurbRamp,
}

string_enum!(BarrierLabelType {
    Obstacle => "obstacle",
    SurfaceProblem => "surface_problem",
    CurbRamp => "curb_ramp",
    MissingCurbRamp => "missing_curb_ramp",
});

impl BarrierLabelType {
    /// Curb-ramp family labels live on crossings; the rest on sidewalks.
    pub fn belongs_on_crossing(&self) -> bool {
        matches!(self, BarrierLabelType::CurbRamp | BarrierLabelType::MissingCurbRamp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Low,
    Mid,
    High,
}

string_enum!(Severity {
    Low => "low",
    Mid => "mid",
    High => "high",
});

impl Severity {
    /// Buckets a five-point crowdsourced rating: 1-2 low, 3 mid, 4-5 high.
    pub fn from_raw(raw: u8) -> Option<Severity> {
        match raw {
            1 | 2 => Some(Severity::Low),
            3 => Some(Severity::Mid),
            4 | 5 => Some(Severity::High),
            _ => None,
        }
    }
}

/// The nine image sets of the passability survey.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcategory {
    FireHydrantPole,
    Vegetation,
    ParkedVehicles,
    CracksHeightDiff,
    BrickCobblestonePanels,
    SandGravelGrass,
    Narrow,
    CurbRamp,
    MissingCurbRamp,
}

string_enum!(Subcategory {
    FireHydrantPole => "fire_hydrant_pole",
    Vegetation => "vegetation",
    ParkedVehicles => "parked_vehicles",
    CracksHeightDiff => "cracks_height_diff",
    BrickCobblestonePanels => "brick_cobblestone_panels",
    SandGravelGrass => "sand_gravel_grass",
    Narrow => "narrow",
    CurbRamp => "curb_ramp",
    MissingCurbRamp => "missing_curb_ramp",
});

impl Subcategory {
    pub fn label_type(&self) -> BarrierLabelType {
        use Subcategory::*;
        match self {
            FireHydrantPole | Vegetation | ParkedVehicles => BarrierLabelType::Obstacle,
            CracksHeightDiff | BrickCobblestonePanels | SandGravelGrass | Narrow => BarrierLabelType::SurfaceProblem,
            CurbRamp => BarrierLabelType::CurbRamp,
            MissingCurbRamp => BarrierLabelType::MissingCurbRamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageMeta {
    pub image_id: String,
    pub label_type: BarrierLabelType,
    pub subcategory: Subcategory,
    pub severity: Severity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Yes,
    No,
    Unsure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassabilityRecord {
    pub respondent_id: String,
    pub image_id: String,
    pub vote: Vote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuelChoice {
    Left,
    Right,
    Same,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuelRecord {
    pub respondent_id: String,
    pub left: String,
    pub right: String,
    pub choice: DuelChoice,
}

/// The nine barrier kinds respondents rank, most difficult first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankedBarrier {
    MissingCurbRamp,
    UnevenPanels,
    SteepSlope,
    BrokenSurface,
    NarrowSidewalk,
    SandGravel,
    GrassSurface,
    BrickCobblestone,
    ManholeCovers,
}

string_enum!(RankedBarrier {
    MissingCurbRamp => "missing_curb_ramp",
    UnevenPanels => "uneven_panels",
    SteepSlope => "steep_slope",
    BrokenSurface => "broken_surface",
    NarrowSidewalk => "narrow_sidewalk",
    SandGravel => "sand_gravel",
    GrassSurface => "grass_surface",
    BrickCobblestone => "brick_cobblestone",
    ManholeCovers => "manhole_covers",
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingRecord {
    pub respondent_id: String,
    pub ordering: Vec<RankedBarrier>,
}

/// One response unit. Participants who answered for several aids appear as
/// several respondents, one per aid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Respondent {
    pub aid: MobilityAid,
    /// Free text for `other` aids.
    pub descriptor: Option<String>,
}

impl Respondent {
    pub fn new(aid: MobilityAid) -> Self {
        Respondent { aid, descriptor: None }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RespondentRepr {
    Aid(MobilityAid),
    Detailed {
        aid: MobilityAid,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        descriptor: Option<String>,
    },
}

impl Serialize for Respondent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.descriptor {
            None => RespondentRepr::Aid(self.aid).serialize(serializer),
            Some(d) => RespondentRepr::Detailed {
                aid: self.aid,
                descriptor: Some(d.clone()),
            }
            .serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for Respondent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::String(s) => s.parse::<MobilityAid>().map(Respondent::new).map_err(|_| {
                serde::de::Error::unknown_variant(
                    &s,
                    &[
                        "walking_cane",
                        "walker",
                        "mobility_scooter",
                        "manual_wheelchair",
                        "motorized_wheelchair",
                        "other",
                    ],
                )
            }),
            other => match serde_json::from_value::<RespondentRepr>(other) {
                Ok(RespondentRepr::Detailed { aid, descriptor }) => Ok(Respondent { aid, descriptor }),
                Ok(RespondentRepr::Aid(aid)) => Ok(Respondent::new(aid)),
                Err(e) => Err(serde::de::Error::custom(format!(
                    "respondent must be an aid name or {{aid, descriptor}}: {e}"
                ))),
            },
        }
    }
}

fn respondents_no_duplicates<'de, D>(deserializer: D) -> Result<BTreeMap<String, Respondent>, D::Error>
where
    D: Deserializer<'de>,
{
    struct NoDupVisitor;

    impl<'de> Visitor<'de> for NoDupVisitor {
        type Value = BTreeMap<String, Respondent>;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a map from respondent id to mobility aid")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
            let mut out = BTreeMap::new();
            while let Some(key) = access.next_key::<String>()? {
                let value: Respondent = access.next_value()?;
                if out.insert(key.clone(), value).is_some() {
                    return Err(serde::de::Error::custom(format!("duplicate respondent id `{key}`")));
                }
            }
            Ok(out)
        }
    }

    deserializer.deserialize_map(NoDupVisitor)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyDataset {
    pub images: Vec<ImageMeta>,
    #[serde(deserialize_with = "respondents_no_duplicates")]
    pub respondents: BTreeMap<String, Respondent>,
    #[serde(default)]
    pub passability: Vec<PassabilityRecord>,
    #[serde(default)]
    pub duels: Vec<DuelRecord>,
    #[serde(default)]
    pub rankings: Vec<RankingRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyErrorKind {
    Malformed,
    UnknownEnum,
    DuplicateId,
    UnknownReference,
    Invariant,
}

impl SurveyErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SurveyErrorKind::Malformed => "malformed",
            SurveyErrorKind::UnknownEnum => "unknown_enum",
            SurveyErrorKind::DuplicateId => "duplicate_id",
            SurveyErrorKind::UnknownReference => "unknown_reference",
            SurveyErrorKind::Invariant => "invariant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind_str} at {path} (schema {schema_path}): {message}", kind_str = kind.as_str())]
pub struct SurveyError {
    pub kind: SurveyErrorKind,
    /// Instance path, e.g. `$.passability[3].vote`.
    pub path: String,
    /// JSON pointer into `schema/survey.schema.json`.
    pub schema_path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Seg {
    Key(String),
    Index(usize),
}

/// Instance location inside a dataset document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct DocPath(Vec<Seg>);

impl DocPath {
    fn root() -> Self {
        DocPath(Vec::new())
    }

    fn key(&self, k: &str) -> Self {
        let mut v = self.0.clone();
        v.push(Seg::Key(k.to_string()));
        DocPath(v)
    }

    fn index(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(Seg::Index(i));
        DocPath(v)
    }

    fn instance(&self) -> String {
        let mut s = String::from("$");
        for seg in &self.0 {
            match seg {
                Seg::Key(k) => {
                    s.push('.');
                    s.push_str(k);
                }
                Seg::Index(i) => s.push_str(&format!("[{i}]")),
            }
        }
        s
    }

    fn schema_pointer(&self) -> String {
        let mut s = String::from("#");
        let mut in_respondents = false;
        for (depth, seg) in self.0.iter().enumerate() {
            match seg {
                Seg::Key(k) if depth == 1 && in_respondents => {
                    let _ = k;
                    s.push_str("/additionalProperties");
                }
                Seg::Key(k) => {
                    if depth == 0 && k == "respondents" {
                        in_respondents = true;
                    }
                    s.push_str("/properties/");
                    s.push_str(k);
                }
                Seg::Index(_) => s.push_str("/items"),
            }
        }
        s
    }

    fn error(&self, kind: SurveyErrorKind, message: impl Into<String>) -> SurveyError {
        SurveyError {
            kind,
            path: self.instance(),
            schema_path: self.schema_pointer(),
            message: message.into(),
        }
    }
}

fn path_from_serde(path: &serde_path_to_error::Path) -> DocPath {
    use serde_path_to_error::Segment;
    let mut out = DocPath::root();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out = out.index(*index),
            Segment::Map { key } => out = out.key(key),
            Segment::Enum { variant } => out = out.key(variant),
            Segment::Unknown => {}
        }
    }
    out
}

/// Parses and validates a dataset document.
pub fn parse_survey_dataset(text: &str) -> Result<SurveyDataset, SurveyError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let dataset: SurveyDataset = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = path_from_serde(err.path());
        let inner = err.into_inner();
        let message = inner.to_string();
        let kind = if message.starts_with("unknown variant") {
            SurveyErrorKind::UnknownEnum
        } else if message.starts_with("duplicate respondent id") {
            SurveyErrorKind::DuplicateId
        } else {
            SurveyErrorKind::Malformed
        };
        path.error(kind, message)
    })?;
    de.end()
        .map_err(|e| DocPath::root().error(SurveyErrorKind::Malformed, e.to_string()))?;
    dataset.validate()?;
    Ok(dataset)
}

impl SurveyDataset {
    /// Checks every referential and structural invariant of the dataset.
    pub fn validate(&self) -> Result<(), SurveyError> {
        let root = DocPath::root();
        let mut images: HashMap<&str, &ImageMeta> = HashMap::new();
        for (i, img) in self.images.iter().enumerate() {
            let at = root.key("images").index(i);
            if images.insert(img.image_id.as_str(), img).is_some() {
                return Err(at.key("image_id").error(
                    SurveyErrorKind::DuplicateId,
                    format!("duplicate image id `{}`", img.image_id),
                ));
            }
            if img.subcategory.label_type() != img.label_type {
                return Err(at.key("label_type").error(
                    SurveyErrorKind::Invariant,
                    format!(
                        "subcategory `{}` belongs to label type `{}`, not `{}`",
                        img.subcategory,
                        img.subcategory.label_type(),
                        img.label_type
                    ),
                ));
            }
        }

        let known_respondent = |id: &str, at: DocPath| -> Result<(), SurveyError> {
            if self.respondents.contains_key(id) {
                Ok(())
            } else {
                Err(at.error(SurveyErrorKind::UnknownReference, format!("unknown respondent `{id}`")))
            }
        };
        let known_image = |id: &str, at: DocPath| -> Result<&ImageMeta, SurveyError> {
            images
                .get(id)
                .copied()
                .ok_or_else(|| at.error(SurveyErrorKind::UnknownReference, format!("unknown image `{id}`")))
        };

        let mut seen_votes: HashSet<(&str, &str)> = HashSet::new();
        for (i, rec) in self.passability.iter().enumerate() {
            let at = root.key("passability").index(i);
            known_respondent(&rec.respondent_id, at.key("respondent_id"))?;
            known_image(&rec.image_id, at.key("image_id"))?;
            if !seen_votes.insert((rec.respondent_id.as_str(), rec.image_id.as_str())) {
                return Err(at.error(
                    SurveyErrorKind::DuplicateId,
                    format!(
                        "respondent `{}` voted twice on image `{}`",
                        rec.respondent_id, rec.image_id
                    ),
                ));
            }
        }

        for (i, duel) in self.duels.iter().enumerate() {
            let at = root.key("duels").index(i);
            known_respondent(&duel.respondent_id, at.key("respondent_id"))?;
            let left = known_image(&duel.left, at.key("left"))?;
            let right = known_image(&duel.right, at.key("right"))?;
            if duel.left == duel.right {
                return Err(at.key("right").error(
                    SurveyErrorKind::Invariant,
                    format!("image `{}` compared with itself", duel.left),
                ));
            }
            if left.subcategory != right.subcategory {
                return Err(at.key("right").error(
                    SurveyErrorKind::Invariant,
                    format!(
                        "duel crosses subcategories `{}` and `{}`",
                        left.subcategory, right.subcategory
                    ),
                ));
            }
        }

        for (i, ranking) in self.rankings.iter().enumerate() {
            let at = root.key("rankings").index(i);
            known_respondent(&ranking.respondent_id, at.key("respondent_id"))?;
            let distinct: BTreeSet<_> = ranking.ordering.iter().collect();
            if ranking.ordering.len() != RankedBarrier::ALL.len() || distinct.len() != RankedBarrier::ALL.len() {
                return Err(at.key("ordering").error(
                    SurveyErrorKind::Invariant,
                    format!(
                        "ordering must be a permutation of all {} barriers (got {} entries, {} distinct)",
                        RankedBarrier::ALL.len(),
                        ranking.ordering.len(),
                        distinct.len()
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn image(&self, image_id: &str) -> Option<&ImageMeta> {
        self.images.iter().find(|img| img.image_id == image_id)
    }

    pub fn aid_of(&self, respondent_id: &str) -> Option<MobilityAid> {
        self.respondents.get(respondent_id).map(|r| r.aid)
    }
}

/// Groups images into the nine per-subcategory sets. Every subcategory is
/// present in the result; each set is sorted by image id.
pub fn partition_image_sets(dataset: &SurveyDataset) -> BTreeMap<Subcategory, Vec<ImageMeta>> {
    let mut sets: BTreeMap<Subcategory, Vec<ImageMeta>> = Subcategory::ALL.iter().map(|s| (*s, Vec::new())).collect();
    for img in &dataset.images {
        sets.entry(img.subcategory).or_default().push(img.clone());
    }
    for set in sets.values_mut() {
        set.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "images": [{"image_id": "C1", "label_type": "curb_ramp", "subcategory": "curb_ramp", "severity": "low"}],
            "respondents": {"r1": "walker"},
            "passability": [{"respondent_id": "r1", "image_id": "C1", "vote": "yes"}],
            "duels": [],
            "rankings": []
        }"#
    }

    #[test]
    fn minimal_document_parses() {
        let ds = parse_survey_dataset(minimal()).unwrap();
        assert_eq!((ds.images.len(), ds.respondents.len(), ds.passability.len()), (1, 1, 1));
        assert_eq!(ds.passability[0].vote, Vote::Yes);
    }

    #[test]
    fn unknown_vote_names_record() {
        let text = minimal().replace(r#""vote": "yes""#, r#""vote": "maybe""#);
        let err = parse_survey_dataset(&text).unwrap_err();
        assert_eq!(err.kind, SurveyErrorKind::UnknownEnum);
        assert_eq!(err.path, "$.passability[0].vote");
        assert_eq!(err.schema_path, "#/properties/passability/items/properties/vote");
        assert!(err.message.contains("maybe"));
    }

    #[test]
    fn unknown_aid_points_into_respondent_map() {
        let text = minimal().replace(r#""r1": "walker""#, r#""r1": "skateboard""#);
        let err = parse_survey_dataset(&text).unwrap_err();
        assert_eq!(err.kind, SurveyErrorKind::UnknownEnum);
        assert_eq!(err.path, "$.respondents.r1");
        assert_eq!(err.schema_path, "#/properties/respondents/additionalProperties");
    }

    #[test]
    fn other_aid_with_descriptor() {
        let text = minimal().replace(
            r#""r1": "walker""#,
            r#""r1": {"aid": "other", "descriptor": "crutches"}"#,
        );
        let ds = parse_survey_dataset(&text).unwrap();
        assert_eq!(ds.respondents["r1"].aid, MobilityAid::Other);
        assert_eq!(ds.respondents["r1"].descriptor.as_deref(), Some("crutches"));
        let back = parse_survey_dataset(&ds.to_json()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn duplicate_respondent_key_rejected() {
        let text = minimal().replace(r#""r1": "walker""#, r#""r1": "walker", "r1": "walker""#);
        let err = parse_survey_dataset(&text).unwrap_err();
        assert_eq!(err.kind, SurveyErrorKind::DuplicateId);
    }

    #[test]
    fn duplicate_image_rejected() {
        let text = minimal().replace(
            r#""images": [{"image_id": "C1", "label_type": "curb_ramp", "subcategory": "curb_ramp", "severity": "low"}]"#,
            r#""images": [{"image_id": "C1", "label_type": "curb_ramp", "subcategory": "curb_ramp", "severity": "low"},
                          {"image_id": "C1", "label_type": "curb_ramp", "subcategory": "curb_ramp", "severity": "mid"}]"#,
        );
        let err = parse_survey_dataset(&text).unwrap_err();
        assert_eq!(err.kind, SurveyErrorKind::DuplicateId);
        assert_eq!(err.path, "$.images[1].image_id");
    }

    #[test]
    fn unknown_reference_rejected() {
        let text = minimal().replace(r#""image_id": "C1", "vote""#, r#""image_id": "Z9", "vote""#);
        let err = parse_survey_dataset(&text).unwrap_err();
        assert_eq!(err.kind, SurveyErrorKind::UnknownReference);
        assert_eq!(err.path, "$.passability[0].image_id");
    }

    #[test]
    fn mismatched_label_type_rejected() {
        let text = minimal().replace(r#""label_type": "curb_ramp""#, r#""label_type": "obstacle""#);
        let err = parse_survey_dataset(&text).unwrap_err();
        assert_eq!(err.kind, SurveyErrorKind::Invariant);
        assert_eq!(err.path, "$.images[0].label_type");
    }

    #[test]
    fn malformed_document() {
        let err = parse_survey_dataset("{\"images\": [").unwrap_err();
        assert_eq!(err.kind, SurveyErrorKind::Malformed);
        let err = parse_survey_dataset(r#"{"images": [], "respondents": {}, "extra": 1}"#).unwrap_err();
        assert_eq!(err.kind, SurveyErrorKind::Malformed);
    }

    #[test]
    fn severity_bucketing() {
        let got: Vec<_> = (0..=6).map(Severity::from_raw).collect();
        assert_eq!(
            got,
            vec![
                None,
                Some(Severity::Low),
                Some(Severity::Low),
                Some(Severity::Mid),
                Some(Severity::High),
                Some(Severity::High),
                None
            ]
        );
        assert!(Severity::Low < Severity::Mid && Severity::Mid < Severity::High);
    }

    #[test]
    fn partition_only_curb_ramps() {
        let ds = parse_survey_dataset(minimal()).unwrap();
        let sets = partition_image_sets(&ds);
        assert_eq!(sets.len(), 9);
        assert_eq!(sets.values().filter(|s| !s.is_empty()).count(), 1);
        assert_eq!(sets[&Subcategory::CurbRamp].len(), 1);
    }
}
