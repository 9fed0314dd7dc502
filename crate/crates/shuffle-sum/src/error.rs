//! Crate-wide error type.

/// Errors produced by samplers, planners, protocols and the harness.
///
/// Planner infeasibility ([`Error::Infeasible`]) is deliberately its own
/// variant: a parameter set for which no valid randomized-response rate
/// exists maps to an `inf` entry in bound tables rather than aborting a
/// pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// No feasible protocol parameters exist for the requested budget.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// A randomizer or analyzer contract was violated at run time.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("csv column {0:?} not found")]
    MissingColumn(String),

    #[error("csv cell at line {line}, column {column:?} is not numeric: {value:?}")]
    NonNumericCell {
        line: usize,
        column: String,
        value: String,
    },

    #[error("csv column {0:?} has no rows")]
    EmptyColumn(String),

    /// A normalizer cannot map the column into [0, 1].
    #[error("cannot normalize column {column:?}: {reason}")]
    Degenerate { column: String, reason: String },

    /// An exact-enumeration instance exceeds the desk-scale limits.
    #[error("instance too large: {0}")]
    ResourceLimit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the error marks planner infeasibility (an `inf` table entry).
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}
