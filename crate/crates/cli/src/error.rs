use friedrichs::Error as CoreError;

/// Failure of one CLI job, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("validation failure: {0}")]
    Validation(String),
    #[error("resource cap: {0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Validation(_) => 2,
            Self::Resource(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::SizeCap { .. } => Self::Resource(msg),
            CoreError::InvalidGrid { .. }
            | CoreError::LengthMismatch { .. }
            | CoreError::DimensionMismatch(_)
            | CoreError::UnknownBuiltin(_)
            | CoreError::UnknownConvention(_)
            | CoreError::InvalidParameter(_)
            | CoreError::InsideBand { .. }
            | CoreError::CutoffBeyondResolution { .. }
            | CoreError::BadBracket { .. } => Self::Config(msg),
            CoreError::NonHermitian { .. }
            | CoreError::AsymmetricKernel { .. }
            | CoreError::EigenSolver(_)
            | CoreError::NotIsolated { .. }
            | CoreError::NoBoundState { .. }
            | CoreError::AllNodesExcluded => Self::Validation(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Config(format!("csv: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
