use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::graph::GraphError;
use crate::profiles::ProfileError;
use crate::routing::RouteError;
use crate::scoring::ScoringError;
use crate::survey::SurveyError;

/// Any failure of the pipeline, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Survey(#[from] SurveyError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn module(&self) -> &'static str {
        match self {
            Error::Survey(_) => "survey-model",
            Error::Analysis(_) => "analysis",
            Error::Profile(_) | Error::UnknownProfile(_) => "profiles",
            Error::Graph(_) => "sidewalk-graph",
            Error::Scoring(_) => "scoring",
            Error::Route(_) => "routing",
            Error::Io { .. } | Error::Config(_) | Error::Usage(_) => "interface",
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Survey(e) => e.kind.as_str(),
            Error::Analysis(e) => e.kind(),
            Error::Profile(e) => e.kind(),
            Error::Graph(e) => e.kind(),
            Error::Scoring(e) => e.kind(),
            Error::Route(e) => e.kind(),
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => "missing_file",
            Error::Io { .. } => "io",
            Error::UnknownProfile(_) => "unknown_profile",
            Error::Config(_) => "invalid_config",
            Error::Usage(_) => "usage",
        }
    }

    /// Machine-readable form: `{"module", "kind", "message"}` plus the
    /// field path for survey errors.
    pub fn to_record(&self) -> serde_json::Value {
        let mut record = serde_json::json!({
            "error": {
                "module": self.module(),
                "kind": self.kind(),
                "message": self.to_string(),
            }
        });
        if let Error::Survey(e) = self {
            record["error"]["path"] = e.path.clone().into();
            record["error"]["schema_path"] = e.schema_path.clone().into();
        }
        record
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
