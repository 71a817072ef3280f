use soliton_core::filtrations::FiltrationError;
use soliton_core::germ::GermError;
use soliton_core::valuations::ValuationError;

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    Failed(String),
    #[error("{0}")]
    Spec(String),
    #[error("{0}")]
    NoConvergence(String),
    #[error("{0}")]
    Reeb(String),
    #[error("pipeline: {0}")]
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Spec(_) => 2,
            CliError::NoConvergence(_) => 3,
            CliError::Reeb(_) => 4,
            CliError::Pipeline(_) => 5,
        }
    }

    /// Same failure with `prefix` prepended to its message.
    pub fn context(self, prefix: &str) -> Self {
        match self {
            CliError::Failed(m) => CliError::Failed(format!("{prefix}: {m}")),
            CliError::Spec(m) => CliError::Spec(format!("{prefix}: {m}")),
            CliError::NoConvergence(m) => CliError::NoConvergence(format!("{prefix}: {m}")),
            CliError::Reeb(m) => CliError::Reeb(format!("{prefix}: {m}")),
            CliError::Pipeline(m) => CliError::Pipeline(format!("{prefix}: {m}")),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Failed(_) => "verification_failed",
            CliError::Spec(_) => "invalid_input",
            CliError::NoConvergence(_) => "no_convergence",
            CliError::Reeb(_) => "reeb_violation",
            CliError::Pipeline(_) => "pipeline_error",
        }
    }
}

impl From<GermError> for CliError {
    fn from(e: GermError) -> Self {
        let msg = e.to_string();
        match e {
            GermError::SpecInvalid { .. } | GermError::DimensionMismatch { .. } => {
                CliError::Spec(msg)
            }
            GermError::ReebViolation(_) | GermError::EmptyTruncation(_) => CliError::Reeb(msg),
            GermError::NoConvergence { .. } => CliError::NoConvergence(msg),
        }
    }
}

impl From<ValuationError> for CliError {
    fn from(e: ValuationError) -> Self {
        let msg = e.to_string();
        match e {
            ValuationError::Germ(g) => g.into(),
            ValuationError::Filtration(f) => f.into(),
            ValuationError::NonPositiveWeights(_) => CliError::Reeb(msg),
            ValuationError::NoConvergence(_) => CliError::NoConvergence(msg),
            _ => CliError::Spec(msg),
        }
    }
}

impl From<FiltrationError> for CliError {
    fn from(e: FiltrationError) -> Self {
        match e {
            FiltrationError::Germ(g) => g.into(),
            other => CliError::Pipeline(other.to_string()),
        }
    }
}
