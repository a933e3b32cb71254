use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The group theory here only makes sense for odd primes.
    #[error("p = 2 is not supported: the modulus must be an odd prime")]
    EvenPrime,
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("modulus {0} is too large (must be below 2^16)")]
    ModulusTooLarge(u32),
    #[error("operands use different moduli ({0} and {1})")]
    ModulusMismatch(u32, u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(
        "relator {index} is not in the commutator subgroup (generator exponents {exponents:?})"
    )]
    RelatorNotInCommutator { index: usize, exponents: Vec<u32> },
    #[error("central decomposition failed: {0}")]
    DecompositionFailure(String),
    #[error("run would visit {count} subspaces, over the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("checkpoint does not match this run: {0}")]
    CheckpointMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}
