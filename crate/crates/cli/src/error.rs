use std::fmt;

use superword::corpus::CorpusError;
use superword::model_io::{LogError, ModelIoError};
use superword::pipeline::PipelineError;
use superword::pretokenizer::PretokenizerError;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad or conflicting arguments. Exit code 1.
    Usage(String),
    /// Unreadable input or unwritable output. Exit code 2.
    Io(String),
    /// Well-formed input that fails a model or training invariant. Exit code 3.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Validation(_) => 3,
        }
    }

    pub fn io(context: impl fmt::Display, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Validation(m) => f.write_str(m),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<PretokenizerError> for CliError {
    fn from(e: PretokenizerError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Options(m) => CliError::Usage(m),
            PipelineError::Corpus(e) => e.into(),
            PipelineError::Pretokenizer(e) => e.into(),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ModelIoError> for CliError {
    fn from(e: ModelIoError) -> Self {
        match e {
            ModelIoError::Io { .. } => CliError::Io(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<LogError> for CliError {
    fn from(e: LogError) -> Self {
        match e {
            LogError::Io(e) => CliError::Io(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}
