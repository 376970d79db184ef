use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid digit system: {0}")]
    InvalidDigitSystem(String),

    #[error("invalid position set: {0}")]
    InvalidPositions(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A construction block formula degenerated at block index `i`.
    #[error("construction block {i} is invalid: {reason}")]
    InvalidBlock { i: u64, reason: String },

    #[error("position {requested} is beyond the horizon {horizon} of a truncated position set")]
    HorizonExceeded { requested: u64, horizon: u64 },

    #[error("{what} needs {required} items, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: String,
        budget: u64,
    },

    #[error("no run of {needed} consecutive positions within horizon {horizon} (longest run found: {longest})")]
    RunNotFound {
        needed: u64,
        horizon: u64,
        longest: u64,
    },

    #[error("point set is empty")]
    EmptySet,

    #[error("complement of the position set is finite within horizon {horizon}; the set contains an interval")]
    ComplementFinite { horizon: u64 },

    #[error("frequency {0} is outside the supported range |m| <= 2^40")]
    FrequencyOutOfRange(i64),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidDigitSystem(_)
            | Error::InvalidPositions(_)
            | Error::InvalidParams(_)
            | Error::InvalidBlock { .. }
            | Error::EmptySet
            | Error::ComplementFinite { .. }
            | Error::FrequencyOutOfRange(_)
            | Error::Config(_) => 2,
            Error::HorizonExceeded { .. }
            | Error::BudgetExceeded { .. }
            | Error::RunNotFound { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
