use thiserror::Error;

/// Errors raised across the library.
///
/// Variants map onto the CLI exit codes: usage and precondition failures exit
/// with 2, budget exhaustion with 3.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An algebraic identity that must hold by construction failed. This means
    /// either the inputs were inconsistent or there is a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("no solution with |eps| > 1 found within norm bound {bound}")]
    NotFound { bound: u64 },

    #[error("no index n <= {cap} satisfies |t_n| < (4/9)|u_n|^2")]
    CapExceeded { cap: usize },

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotFound { .. } | Error::CapExceeded { .. } | Error::BudgetExhausted(_) => 3,
            Error::Invariant(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
