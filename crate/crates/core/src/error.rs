use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid hypergraph: {0}")]
    InvalidGraph(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("empty region passed to {0}")]
    EmptyRegion(&'static str),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("configuration has {got} entries but the model has {expected} variables")]
    ConfigurationLength { expected: usize, got: usize },

    #[error(
        "state space of 2^{bits:.2} configurations exceeds the enumeration budget of 2^{budget}"
    )]
    BudgetExceeded { bits: f64, budget: u32 },

    #[error("conditioning on an event of zero probability")]
    ZeroProbability,

    #[error("regions overlap: {0}")]
    Overlap(String),

    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),

    #[error("invalid process: {0}")]
    InvalidProcess(String),

    #[error("observation has zero likelihood under every configuration")]
    ZeroLikelihood,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Pauli operators do not commute: terms {0} and {1}")]
    NonCommuting(usize, usize),

    #[error("invalid Pauli operator: {0}")]
    InvalidPauli(String),

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("channel is not stabilizer mixing (residual {0:.3e})")]
    NotStabilizerMixing(f64),

    #[error("density matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("insufficient samples for a fit: {0}")]
    InsufficientSamples(String),
}

pub type Result<T> = std::result::Result<T, Error>;
