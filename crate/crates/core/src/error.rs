use thiserror::Error;

use crate::weights::WeightClass;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or analysing a problem.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input: duplicate names, non-permutations, unknown identifiers.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Total capacity cannot seat every agent.
    #[error("infeasible capacities: total capacity {capacity} is below the number of agents {agents}")]
    InfeasibleCapacity { capacity: u64, agents: usize },

    /// Serial dictatorship ran out of seats; `position` is 1-based.
    #[error("no object has remaining capacity for the agent at position {position}")]
    Unmatchable { position: usize },

    /// A distribution's support exceeds the enumeration cap.
    #[error("support of {size} profiles exceeds the enumeration cap of {cap}")]
    SupportTooLarge { size: u128, cap: u128 },

    /// An operation refused because the instance is above a configured size cap.
    #[error("{what}: n = {n} exceeds the cap of {cap}")]
    SizeCap { what: &'static str, n: usize, cap: usize },

    /// The distribution kind cannot be used for the requested operation.
    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    /// A weight scheme was requested outside the setting it is derived for.
    #[error("incompatible weight scheme: {0}")]
    IncompatibleScheme(String),

    /// Position marginals are not doubly stochastic.
    #[error("marginals are not doubly stochastic: {0}")]
    NotStochastic(String),

    /// The weight class does not admit the requested solver.
    #[error("solver requires a position-decomposable weight class, got {0:?}")]
    WrongWeightClass(WeightClass),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
