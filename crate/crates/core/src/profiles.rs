//! Per-group confidence profiles and user customizations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::analysis::ConfidenceTable;
use crate::survey::{BarrierLabelType, MobilityAid, Severity};

/// Id of the built-in all-zero profile that reproduces metric shortest paths.
pub const SHORTEST_PROFILE_ID: &str = "shortest";

/// Confidence-not-passable for each of the four barrier label types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Confidence {
    pub obstacle: f64,
    pub surface_problem: f64,
    pub curb_ramp: f64,
    pub missing_curb_ramp: f64,
}

impl Confidence {
    pub const ZERO: Confidence = Confidence {
        obstacle: 0.0,
        surface_problem: 0.0,
        curb_ramp: 0.0,
        missing_curb_ramp: 0.0,
    };

    pub fn get(&self, label_type: BarrierLabelType) -> f64 {
        match label_type {
            BarrierLabelType::Obstacle => self.obstacle,
            BarrierLabelType::SurfaceProblem => self.surface_problem,
            BarrierLabelType::CurbRamp => self.curb_ramp,
            BarrierLabelType::MissingCurbRamp => self.missing_curb_ramp,
        }
    }

    pub fn set(&mut self, label_type: BarrierLabelType, value: f64) {
        match label_type {
            BarrierLabelType::Obstacle => self.obstacle = value,
            BarrierLabelType::SurfaceProblem => self.surface_problem = value,
            BarrierLabelType::CurbRamp => self.curb_ramp = value,
            BarrierLabelType::MissingCurbRamp => self.missing_curb_ramp = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileGroup {
    Aid(MobilityAid),
    Custom,
}

impl fmt::Display for ProfileGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileGroup::Aid(aid) => write!(f, "{aid}"),
            ProfileGroup::Custom => f.write_str("custom"),
        }
    }
}

impl Serialize for ProfileGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProfileGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s == "custom" {
            return Ok(ProfileGroup::Custom);
        }
        s.parse::<MobilityAid>()
            .map(ProfileGroup::Aid)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Computed from survey responses.
    Derived,
    /// Shipped with the engine (the zero "shortest" profile).
    Builtin,
    Custom {
        base: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupProfile {
    pub profile_id: String,
    pub group: ProfileGroup,
    pub confidence: Confidence,
    pub provenance: Provenance,
}

/// How a label's weight is derived from a profile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelWeighting {
    /// The type-level C of the label, nothing else.
    #[default]
    TypeLevel,
    /// Extension: C scaled by 0.5 / 1.0 / 1.5 for low / mid / high severity.
    SeverityScaled,
}

impl LabelWeighting {
    pub fn severity_factor(&self, severity: Severity) -> f64 {
        match self {
            LabelWeighting::TypeLevel => 1.0,
            LabelWeighting::SeverityScaled => match severity {
                Severity::Low => 0.5,
                Severity::Mid => 1.0,
                Severity::High => 1.5,
            },
        }
    }
}

impl GroupProfile {
    pub fn shortest() -> GroupProfile {
        GroupProfile {
            profile_id: SHORTEST_PROFILE_ID.to_string(),
            group: ProfileGroup::Custom,
            confidence: Confidence::ZERO,
            provenance: Provenance::Builtin,
        }
    }

    pub fn c(&self, label_type: BarrierLabelType) -> f64 {
        self.confidence.get(label_type)
    }

    /// Weight one label contributes under this profile.
    pub fn label_weight(&self, label_type: BarrierLabelType, severity: Severity, weighting: LabelWeighting) -> f64 {
        self.c(label_type) * weighting.severity_factor(severity)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.profile_id.is_empty() {
            return Err(ProfileError::Invalid {
                path: "profile_id".into(),
                message: "profile id must not be empty".into(),
            });
        }
        for t in BarrierLabelType::ALL {
            check_range(*t, self.c(*t)).map_err(|_| ProfileError::Invalid {
                path: format!("confidence.{t}"),
                message: format!("confidence {} outside [0, 1]", self.c(*t)),
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("confidence table is missing cells: {}", format_cells(.0))]
    IncompleteTable(Vec<(MobilityAid, BarrierLabelType)>),
    #[error("override for `{label_type}` is {value}, outside [0, 1]")]
    OutOfRange { label_type: BarrierLabelType, value: f64 },
    #[error("invalid profile document at {path}: {message}")]
    Invalid { path: String, message: String },
    #[error("duplicate profile id `{0}`")]
    DuplicateId(String),
}

impl ProfileError {
    pub fn kind(&self) -> &'static str {
        match self {
            ProfileError::IncompleteTable(_) => "incomplete_table",
            ProfileError::OutOfRange { .. } => "out_of_range",
            ProfileError::Invalid { .. } => "invalid_profile",
            ProfileError::DuplicateId(_) => "duplicate_profile",
        }
    }
}

fn format_cells(cells: &[(MobilityAid, BarrierLabelType)]) -> String {
    cells
        .iter()
        .map(|(g, t)| format!("{g}/{t}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_range(label_type: BarrierLabelType, value: f64) -> Result<(), ProfileError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ProfileError::OutOfRange { label_type, value })
    }
}

/// One derived profile per canonical group, in canonical group order.
pub fn build_profiles(table: &ConfidenceTable) -> Result<Vec<GroupProfile>, ProfileError> {
    let mut missing = Vec::new();
    let mut profiles = Vec::new();
    for aid in MobilityAid::CANONICAL {
        let mut confidence = Confidence::ZERO;
        for t in BarrierLabelType::ALL {
            match table.get(aid, *t) {
                Some(c) => confidence.set(*t, c),
                None => missing.push((aid, *t)),
            }
        }
        profiles.push(GroupProfile {
            profile_id: aid.as_str().to_string(),
            group: ProfileGroup::Aid(aid),
            confidence,
            provenance: Provenance::Derived,
        });
    }
    if !missing.is_empty() {
        return Err(ProfileError::IncompleteTable(missing));
    }
    Ok(profiles)
}

/// A custom profile that inherits every C not overridden from `base`.
pub fn customize_profile(
    base: &GroupProfile,
    profile_id: impl Into<String>,
    overrides: &BTreeMap<BarrierLabelType, f64>,
) -> Result<GroupProfile, ProfileError> {
    let mut confidence = base.confidence;
    for (t, v) in overrides {
        check_range(*t, *v)?;
        confidence.set(*t, *v);
    }
    let profile = GroupProfile {
        profile_id: profile_id.into(),
        group: ProfileGroup::Custom,
        confidence,
        provenance: Provenance::Custom {
            base: base.profile_id.clone(),
        },
    };
    profile.validate()?;
    Ok(profile)
}

pub fn save_profiles(profiles: &[GroupProfile]) -> String {
    let mut s = serde_json::to_string_pretty(profiles).expect("profiles serialize");
    s.push('\n');
    s
}

/// Parses and validates a profile document (a JSON array of profiles).
pub fn load_profiles(text: &str) -> Result<Vec<GroupProfile>, ProfileError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let profiles: Vec<GroupProfile> = serde_path_to_error::deserialize(&mut de).map_err(|e| ProfileError::Invalid {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    let mut seen = BTreeSet::new();
    for (i, p) in profiles.iter().enumerate() {
        p.validate().map_err(|e| match e {
            ProfileError::Invalid { path, message } => ProfileError::Invalid {
                path: format!("[{i}].{path}"),
                message,
            },
            other => other,
        })?;
        if !seen.insert(p.profile_id.as_str()) {
            return Err(ProfileError::DuplicateId(p.profile_id.clone()));
        }
    }
    Ok(profiles)
}
