use serde::Serialize;
use thiserror::Error;

use threshreg::DetectionResult;

/// Failures of a command, grouped by the exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{error}")]
    Estimation {
        error: threshreg::Error,
        partial: Option<Box<DetectionResult>>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Estimation { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Estimation { .. } => "estimation",
        }
    }

    /// Bad arguments are usage errors, everything else comes from the run itself.
    pub fn from_library(error: threshreg::Error) -> Self {
        if error.is_domain() {
            CliError::Usage(error.to_string())
        } else {
            CliError::Estimation { error, partial: None }
        }
    }

    pub fn report(&self) -> ErrorReport<'_> {
        ErrorReport {
            schema_version: crate::report::SCHEMA_VERSION,
            error: ErrorBody {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: self.to_string(),
                partial: match self {
                    CliError::Estimation { partial, .. } => partial.as_deref(),
                    _ => None,
                },
            },
        }
    }
}

#[derive(Serialize)]
pub struct ErrorReport<'a> {
    pub schema_version: u32,
    pub error: ErrorBody<'a>,
}

#[derive(Serialize)]
pub struct ErrorBody<'a> {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial: Option<&'a DetectionResult>,
}
