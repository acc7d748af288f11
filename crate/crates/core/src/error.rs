use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("probability at outcome {index} must be finite and > 0, got {value}")]
    NonPositiveProbability { index: usize, value: f64 },

    #[error("probability at outcome {index} must be finite and >= 0, got {value}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("block {block} has zero mass under the conditioning measure")]
    ZeroMassBlock { block: usize },

    #[error("a profile needs at least 3 agents, got {0}")]
    TooFewAgents(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "measure {measure} does not agree with the base measure on block {block} \
         (mass {found}, expected {expected})"
    )]
    MeasureRestriction {
        measure: usize,
        block: usize,
        found: f64,
        expected: f64,
    },

    #[error("QBRS is only defined for trivial information")]
    NonTrivialInformation,

    #[error("no mixing weight in [0, 1] solves the QBRS equation at s = {s} (p = {p})")]
    QbrsNoSolution { s: f64, p: f64 },

    #[error("allocation exceeds the aggregate at outcome {outcome} by {excess}")]
    Infeasible { outcome: usize, excess: f64 },

    #[error("{axiom} is not applicable to {rule}: {reason}")]
    Inapplicable {
        axiom: &'static str,
        rule: String,
        reason: &'static str,
    },

    #[error("aggregate volatility is zero while some agent is risky (fully offsetting pool)")]
    DegeneratePool,

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue}) at {context}")]
    NotPsd { min_eigenvalue: f64, context: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid loss table: {0}")]
    InvalidTable(String),

    #[error("non-finite expected utility estimate")]
    NonFiniteUtility,
}
