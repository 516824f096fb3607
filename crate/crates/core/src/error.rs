use thiserror::Error;

/// Errors raised anywhere in the workbench.
///
/// Variants are grouped by how the command line reports them: parameter
/// problems, numerical failures, and exhausted budgets each map to their own
/// exit code (see [`Error::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-convergent tail: {0}")]
    NonConvergentTail(String),
    #[error("infinite extent not supported: {0}")]
    InfiniteExtent(String),
    #[error("pole or singularity: {0}")]
    Singularity(String),
    #[error("numerical failure: {0}")]
    NonConvergence(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ParameterOutOfRange(_)
            | Error::InvalidInput(_)
            | Error::InfiniteExtent(_)
            | Error::Io(_) => 1,
            Error::NonConvergentTail(_) | Error::Singularity(_) | Error::NonConvergence(_) => 2,
            Error::BudgetExceeded(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::ParameterOutOfRange(_) => "parameter-out-of-range",
            Error::InvalidInput(_) => "invalid-input",
            Error::NonConvergentTail(_) => "non-convergent-tail",
            Error::InfiniteExtent(_) => "infinite-extent",
            Error::Singularity(_) => "singularity",
            Error::NonConvergence(_) => "non-convergence",
            Error::BudgetExceeded(_) => "budget-exceeded",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
