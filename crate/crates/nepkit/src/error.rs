use std::path::PathBuf;

use nepkit_core::metrics::MetricError;
use nepkit_core::nepall::ComposeError;
use nepkit_core::paper::BatchParseError;
use nepkit_core::presort::PresortError;
use nepkit_core::render::RenderError;
use nepkit_core::workflow::WorkflowError;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot listen on {address}: {source}")]
    Bind {
        address: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt store file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error(transparent)]
    Batch(#[from] BatchParseError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Presort(#[from] PresortError),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{kind} `{key}` not found")]
    NotFound { kind: &'static str, key: String },
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Invalid(String),
}

/// Coarse error classes, used for HTTP status codes and exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    NotFound,
    State,
    Validation,
    Internal,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn not_found(kind: &'static str, key: impl ToString) -> Self {
        Error::NotFound {
            kind,
            key: key.to_string(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotFound { .. } => ErrorClass::NotFound,
            Error::Conflict(_) | Error::Compose(_) => ErrorClass::State,
            Error::Workflow(e) if e.is_state_error() => ErrorClass::State,
            Error::Presort(PresortError::MissingPaper(_))
            | Error::Render(RenderError::MissingPaper(_)) => ErrorClass::NotFound,
            Error::Io { .. } | Error::Bind { .. } | Error::Corrupt { .. } => ErrorClass::Internal,
            _ => ErrorClass::Validation,
        }
    }

    /// Stable machine-readable code for API clients.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io_error",
            Error::Bind { .. } => "bind_error",
            Error::Corrupt { .. } => "corrupt_store",
            Error::Batch(_) => "parse_error",
            Error::Compose(_) => "ordering_error",
            Error::Presort(PresortError::Inconsistent { .. }) => "consistency_error",
            Error::Presort(PresortError::MissingPaper(_)) => "missing_paper",
            Error::Presort(PresortError::NotTrained(_)) => "not_trained",
            Error::Presort(PresortError::Format { .. }) => "corrupt_store",
            Error::Workflow(WorkflowError::EmptySelection) => "empty_selection",
            Error::Workflow(WorkflowError::NotInSource(_) | WorkflowError::NotInSelection(_)) => {
                "subset_violation"
            }
            Error::Workflow(WorkflowError::DuplicateHandle(_)) => "duplicate_handle",
            Error::Workflow(WorkflowError::InvalidTransition { .. }) => "state_error",
            Error::Workflow(WorkflowError::Corrupt(_)) => "corrupt_store",
            Error::Metric(MetricError::NotApplicable) => "not_applicable",
            Error::Metric(_) => "argument_error",
            Error::Render(RenderError::MissingPaper(_)) => "missing_paper",
            Error::Render(_) => "precondition_error",
            Error::NotFound { .. } => "not_found",
            Error::Conflict(_) => "conflict",
            Error::Invalid(_) => "invalid_argument",
        }
    }
}
